//! Fusion-based error correction on the synchronous foliated Floquet colour code
//! with quantum-dot photon sources.
//!
//! The crate simulates repeat-until-success encoded fusions between time-bin
//! photons emitted by a lattice of spin emitters, tracks circuit-level noise as
//! Pauli frames, decodes the resulting fusion syndrome graph and scores logical
//! failures. It also carries the closed-form models around the simulator:
//! logical clock cycle, hardware resource counts, timing constraints, dephasing
//! fidelity and benchmark conversions.

pub mod chronology;
pub mod config;
pub mod decoder;
pub mod dephasing;
pub mod error;
pub mod fusion;
pub mod gf2;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod oracle;
pub mod report;

pub use error::{Error, Result};
pub use lattice::{LatticeSpec, SyndromeGraph};
