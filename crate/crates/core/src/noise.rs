//! Quantum-dot noise catalogue as Pauli-frame updates.
//!
//! Each emitter carries a spin frame; each emitted time-bin photon gets its own
//! frame entry. A frame bit is a small mask: bit 0 is the sampled error, the
//! other bits track linear responses to symbolic errors (used to close the
//! periodic time boundary). All sampling functions only touch bit 0.
//!
//! One photon round is: excite early, intra-bin π, excite late, refocusing π.
//! Encoded qubits are separated by a Hadamard; idle attempt slots are filled
//! with two buffer π-pulses.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bit 0 of a frame mask: the sampled error.
pub const SAMPLED: u8 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhotonError {
    pub x: u8,
    pub z: u8,
    pub lost: bool,
}

impl PhotonError {
    pub fn has_x(&self) -> bool {
        self.x & SAMPLED != 0
    }

    pub fn has_z(&self) -> bool {
        self.z & SAMPLED != 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PauliFrame {
    pub spin_x: u8,
    pub spin_z: u8,
    pub photons: Vec<PhotonError>,
}

impl PauliFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spin(&self) -> (bool, bool) {
        (self.spin_x & SAMPLED != 0, self.spin_z & SAMPLED != 0)
    }

    pub fn last_photon(&self) -> &PhotonError {
        self.photons.last().expect("no photon emitted")
    }

    fn last_mut(&mut self) -> &mut PhotonError {
        self.photons.last_mut().expect("no photon emitted")
    }

    pub fn clear_spin(&mut self) {
        self.spin_x = 0;
        self.spin_z = 0;
    }
}

/// Appends a photon and maps the spin error through the emission CNOT: spin X
/// is copied onto the photon, spin Z moves onto the photon.
pub fn propagate_cnot(frame: &mut PauliFrame) {
    frame.photons.push(PhotonError { x: frame.spin_x, z: frame.spin_z, lost: false });
    frame.spin_z = 0;
}

pub fn propagate_hadamard(frame: &mut PauliFrame) {
    std::mem::swap(&mut frame.spin_x, &mut frame.spin_z);
}

/// Draws a Bernoulli bit without consuming randomness when `p == 0`.
#[inline]
pub fn flip<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    p > 0.0 && (p >= 1.0 || rng.gen::<f64>() < p)
}

/// Branching at the photon just appended: X on the photon and on the spin.
/// In the first round after initialisation the pair X⊗X is a stabiliser of
/// the spin-photon state, so the same rule holds there too.
pub fn sample_branching<R: Rng + ?Sized>(frame: &mut PauliFrame, p_b: f64, rng: &mut R) -> bool {
    if !flip(rng, p_b) {
        return false;
    }
    frame.last_mut().x ^= SAMPLED;
    frame.spin_x ^= SAMPLED;
    true
}

/// Steps of the generation circuit after which faults are sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    ExciteEarly,
    IntraBinPi,
    ExciteLate,
    RefocusPi,
    Hadamard,
    BufferPi,
}

impl StepKind {
    /// Steps between the two excitations: an X there breaks the emission.
    pub fn inside_bin(self) -> bool {
        matches!(self, StepKind::ExciteEarly | StepKind::IntraBinPi)
    }
}

/// Effect of a fault on the photon currently being emitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmissionEffect {
    /// Toggles the parity of spin flips inside the time bin.
    pub bin_flip: bool,
}

/// Single-qubit Pauli drawn by the depolarising channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn sample_depolarising<R: Rng + ?Sized>(p_dep: f64, rng: &mut R) -> Pauli {
    if !flip(rng, p_dep) {
        return Pauli::I;
    }
    match rng.gen_range(0..3) {
        0 => Pauli::X,
        1 => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// Applies a spin Pauli occurring after `step`. Inside the time bin the X part
/// is deferred to the bin-flip parity; elsewhere it lands on the spin.
pub fn apply_spin_pauli(frame: &mut PauliFrame, pauli: Pauli, step: StepKind) -> EmissionEffect {
    let (x, z) = match pauli {
        Pauli::I => (false, false),
        Pauli::X => (true, false),
        Pauli::Y => (true, true),
        Pauli::Z => (false, true),
    };
    if z {
        frame.spin_z ^= SAMPLED;
    }
    if x && step.inside_bin() {
        return EmissionEffect { bin_flip: true };
    }
    if x {
        frame.spin_x ^= SAMPLED;
    }
    EmissionEffect::default()
}

pub fn sample_spin_depolarisation<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    p_dep: f64,
    step: StepKind,
    rng: &mut R,
) -> EmissionEffect {
    let p = sample_depolarising(p_dep, rng);
    apply_spin_pauli(frame, p, step)
}

/// Laser-induced spin flip during a rotation pulse. During the intra-bin π it
/// breaks the emission; elsewhere it is a spin X.
pub fn sample_laser_spin_flip<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    kappa_bar: f64,
    step: StepKind,
    rng: &mut R,
) -> EmissionEffect {
    if !flip(rng, kappa_bar) {
        return EmissionEffect::default();
    }
    if step == StepKind::IntraBinPi {
        EmissionEffect { bin_flip: true }
    } else {
        frame.spin_x ^= SAMPLED;
        EmissionEffect::default()
    }
}

/// Closes a time bin. An odd number of spin flips inside the bin means no
/// photon or two photons (both are loss) and leaves the spin with X and Z.
/// An even number cancels.
pub fn resolve_bin(frame: &mut PauliFrame, bin_flips: bool) {
    if bin_flips {
        frame.last_mut().lost = true;
        frame.spin_x ^= SAMPLED;
        frame.spin_z ^= SAMPLED;
    }
}

pub fn sample_photon_distinguishability<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    p_x_photon: f64,
    p_z_photon: f64,
    rng: &mut R,
) {
    let x = flip(rng, p_x_photon);
    let z = flip(rng, p_z_photon);
    let ph = frame.last_mut();
    if x {
        ph.x ^= SAMPLED;
    }
    if z {
        ph.z ^= SAMPLED;
    }
}

pub fn sample_ground_state_dephasing<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    p_z_spin: f64,
    rng: &mut R,
) {
    if flip(rng, p_z_spin) {
        frame.spin_z ^= SAMPLED;
    }
}

/// Emitter blinking state, persisted across emissions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlinkState {
    /// `None` before the first emission of the cycle.
    pub alive: Option<bool>,
}

/// Stationary probability of the alive state.
pub fn stationary_alive(p_a: f64, p_d: f64) -> f64 {
    if p_a + p_d == 0.0 {
        1.0
    } else {
        p_a / (p_a + p_d)
    }
}

/// Steps the two-state chain once; returns whether the photon is lost.
pub fn sample_blinking<R: Rng + ?Sized>(
    state: &mut BlinkState,
    p_a: f64,
    p_d: f64,
    rng: &mut R,
) -> bool {
    let alive = match state.alive {
        None => !flip(rng, 1.0 - stationary_alive(p_a, p_d)),
        Some(true) => !flip(rng, p_d),
        Some(false) => flip(rng, p_a),
    };
    state.alive = Some(alive);
    !alive
}

/// Physical error rates. Probabilities are per event as documented per field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    /// Uniform photon loss, per photon.
    pub p_loss: f64,
    /// Branching to the non-cycling transition, per emission.
    pub p_b: f64,
    /// Spin depolarisation after every circuit step.
    pub p_dep: f64,
    /// Ground-state spin Z after every emission and every Hadamard.
    pub p_z_spin: f64,
    /// Emitter-emitter distinguishability, photon X per photon.
    pub p_x_photon: f64,
    /// Single-emitter distinguishability, photon Z per photon.
    pub p_z_photon: f64,
    /// Blinking dead-to-alive probability per emission.
    pub p_a: f64,
    /// Blinking alive-to-dead probability per emission.
    pub p_d: f64,
    /// Laser-induced spin flip probability per rotation pulse.
    pub kappa_bar: f64,
    /// Whether depolarisation also acts after idle buffer π-pulses.
    pub depolarise_buffers: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            p_loss: 0.0,
            p_b: 0.0,
            p_dep: 0.0,
            p_z_spin: 0.0,
            p_x_photon: 0.0,
            p_z_photon: 0.0,
            p_a: 1.0,
            p_d: 0.0,
            kappa_bar: 0.0,
            depolarise_buffers: true,
        }
    }
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_loss", self.p_loss),
            ("p_b", self.p_b),
            ("p_dep", self.p_dep),
            ("p_z_spin", self.p_z_spin),
            ("p_x_photon", self.p_x_photon),
            ("p_z_photon", self.p_z_photon),
            ("p_a", self.p_a),
            ("p_d", self.p_d),
            ("kappa_bar", self.kappa_bar),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn blinking(&self) -> bool {
        self.p_d > 0.0
    }

    /// Stationary dead fraction of the blinking chain.
    pub fn blink_loss(&self) -> f64 {
        1.0 - stationary_alive(self.p_a, self.p_d)
    }

    /// Blinking rates with stationary dead fraction `f` and `p_a + p_d = s`.
    /// `s = 1` makes successive emissions independent; smaller `s` lengthens
    /// dark and bright periods.
    pub fn with_blinking(mut self, f: f64, s: f64) -> Self {
        self.p_d = f * s;
        self.p_a = (1.0 - f) * s;
        self
    }

    /// Sets one named channel; used by sweeps.
    pub fn set_channel(&mut self, channel: Channel, value: f64, blink_sum: f64) {
        match channel {
            Channel::Loss => self.p_loss = value,
            Channel::Branching => self.p_b = value,
            Channel::Depolarising => self.p_dep = value,
            Channel::GroundDephasing => self.p_z_spin = value,
            Channel::PhotonX => self.p_x_photon = value,
            Channel::PhotonZ => self.p_z_photon = value,
            Channel::Blinking => *self = self.with_blinking(value, blink_sum),
            Channel::LaserFlip => self.kappa_bar = value,
        }
    }
}

/// Noise channel selectable for threshold sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Loss,
    Branching,
    Depolarising,
    GroundDephasing,
    PhotonX,
    PhotonZ,
    Blinking,
    LaserFlip,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::Loss,
        Channel::Branching,
        Channel::Depolarising,
        Channel::GroundDephasing,
        Channel::PhotonX,
        Channel::PhotonZ,
        Channel::Blinking,
        Channel::LaserFlip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Loss => "loss",
            Channel::Branching => "branching",
            Channel::Depolarising => "depolarising",
            Channel::GroundDephasing => "ground-dephasing",
            Channel::PhotonX => "photon-x",
            Channel::PhotonZ => "photon-z",
            Channel::Blinking => "blinking",
            Channel::LaserFlip => "laser-flip",
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown channel '{s}'")))
    }
}

/// Per-emitter sampler driving the generation circuit.
#[derive(Clone, Debug, Default)]
pub struct Emitter {
    pub frame: PauliFrame,
    pub blink: BlinkState,
}

impl Emitter {
    /// Spin rotation with depolarisation and laser flips afterwards.
    fn pulse<R: Rng + ?Sized>(&mut self, noise: &NoiseParams, step: StepKind, rng: &mut R) -> bool {
        let depol = step != StepKind::BufferPi || noise.depolarise_buffers;
        let mut bin = false;
        if depol {
            bin ^= sample_spin_depolarisation(&mut self.frame, noise.p_dep, step, rng).bin_flip;
        }
        if matches!(
            step,
            StepKind::IntraBinPi | StepKind::RefocusPi | StepKind::Hadamard | StepKind::BufferPi
        ) {
            bin ^= sample_laser_spin_flip(&mut self.frame, noise.kappa_bar, step, rng).bin_flip;
        }
        bin
    }

    /// Hadamard opening an encoded qubit.
    pub fn hadamard<R: Rng + ?Sized>(&mut self, noise: &NoiseParams, rng: &mut R) {
        propagate_hadamard(&mut self.frame);
        self.pulse(noise, StepKind::Hadamard, rng);
        sample_ground_state_dephasing(&mut self.frame, noise.p_z_spin, rng);
    }

    /// One idle attempt slot.
    pub fn idle<R: Rng + ?Sized>(&mut self, noise: &NoiseParams, rng: &mut R) {
        self.pulse(noise, StepKind::BufferPi, rng);
        self.pulse(noise, StepKind::BufferPi, rng);
    }

    /// One emission round; returns the photon's frame entry.
    pub fn emit<R: Rng + ?Sized>(&mut self, noise: &NoiseParams, rng: &mut R) -> PhotonError {
        propagate_cnot(&mut self.frame);
        sample_branching(&mut self.frame, noise.p_b, rng);
        let mut bin = self.pulse(noise, StepKind::ExciteEarly, rng);
        bin ^= self.pulse(noise, StepKind::IntraBinPi, rng);
        self.pulse(noise, StepKind::ExciteLate, rng);
        self.pulse(noise, StepKind::RefocusPi, rng);
        resolve_bin(&mut self.frame, bin);
        sample_ground_state_dephasing(&mut self.frame, noise.p_z_spin, rng);
        sample_photon_distinguishability(&mut self.frame, noise.p_x_photon, noise.p_z_photon, rng);
        let mut lost = flip(rng, noise.p_loss);
        if noise.blinking() {
            lost |= sample_blinking(&mut self.blink, noise.p_a, noise.p_d, rng);
        }
        let ph = self.frame.last_mut();
        ph.lost |= lost;
        *ph
    }

    /// Spin projected into a known state by a Z-basis readout.
    pub fn reinitialise(&mut self) {
        self.frame.clear_spin();
    }
}

/// Hardware benchmark conversions of channel thresholds.
pub mod benchmarks {
    /// Minimum optical cyclicity for a branching threshold: `p_b < 1/(C+1)`.
    pub fn cyclicity(p_b: f64) -> f64 {
        1.0 / p_b - 1.0
    }

    /// Markovian T₂ in units of the repetition time: `T₂ = 2τ_rep/(4p/3)`.
    pub fn t2_over_tau_rep(p_dep: f64) -> f64 {
        2.0 / (4.0 * p_dep / 3.0)
    }

    /// Laser flip rate matching a depolarising threshold whose X share is `p/3`.
    pub fn kappa_bar(p_dep: f64) -> f64 {
        3.0 * p_dep
    }

    pub fn hom_visibility(p: f64) -> f64 {
        1.0 - p
    }

    pub fn efficiency(loss: f64) -> f64 {
        1.0 - loss
    }

    /// Blinking ratio `P_A/P_D` giving stationary dead fraction `f`.
    pub fn blink_ratio(f: f64) -> f64 {
        (1.0 - f) / f
    }
}
