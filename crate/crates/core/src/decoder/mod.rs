//! Syndrome extraction, erasure absorption, matching and logical scoring.
//!
//! The two check species are decoded independently. For each species:
//! erased edges are contracted into supercells and the logical surfaces are
//! deformed around them; supercells with odd value are paired by a matching
//! decoder; the correction is applied and each deformed surface is read out.

pub mod blossom;
mod matching;
pub mod supercell;
mod uf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{OutcomeKind, SurfaceSelection, SyndromeGraph};
pub use supercell::Supercells;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatcherKind {
    /// Exact minimum-weight perfect matching.
    #[default]
    Mwpm,
    /// Union-find growth with peeling.
    UnionFind,
}

/// Integer matching weight per outcome type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeWeights {
    pub xx: u32,
    pub zz: u32,
}

impl Default for EdgeWeights {
    fn default() -> Self {
        EdgeWeights { xx: 1, zz: 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub matcher: MatcherKind,
    pub surfaces: SurfaceSelection,
    pub weights: EdgeWeights,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecodeVerdict {
    pub logical_erasure: bool,
    /// Meaningful only when `logical_erasure` is false.
    pub logical_error: bool,
}

impl DecodeVerdict {
    pub fn failed(&self) -> bool {
        self.logical_erasure || self.logical_error
    }
}

/// Per-trial decoding record for failure triage.
#[derive(Clone, Debug, Default, Serialize)]
pub struct DecodeTrace {
    /// Global check ids of the supercell representatives with value −1.
    pub defects: Vec<usize>,
    pub erased: Vec<usize>,
    pub correction: Vec<usize>,
    pub surface_erased: Vec<bool>,
    pub surface_flipped: Vec<bool>,
    pub verdict: DecodeVerdict,
}

/// Decoder bound to one syndrome graph. Cheap to share across threads.
pub struct Decoder<'g> {
    graph: &'g SyndromeGraph,
    config: DecoderConfig,
    num_surfaces: usize,
    /// Per species, per local edge: mask of selected surfaces containing it.
    surface_mask: [Vec<u8>; 2],
    edge_cost: [Vec<u32>; 2],
}

impl<'g> Decoder<'g> {
    pub fn new(graph: &'g SyndromeGraph, config: DecoderConfig) -> Self {
        let surfaces = graph.logical_surfaces(config.surfaces);
        let mut surface_mask =
            [0, 1].map(|s| vec![0u8; graph.species(s).num_edges()]);
        for (k, surf) in surfaces.iter().enumerate() {
            for &e in &surf.edges {
                surface_mask[surf.species as usize][e as usize] |= 1 << k;
            }
        }
        let edge_cost = [0, 1].map(|s| {
            let g = graph.species(s);
            (0..g.num_edges())
                .map(|e| match g.outcome(e) % 2 {
                    0 => config.weights.xx,
                    _ => config.weights.zz,
                })
                .collect()
        });
        Decoder { graph, config, num_surfaces: surfaces.len(), surface_mask, edge_cost }
    }

    pub fn graph(&self) -> &SyndromeGraph {
        self.graph
    }

    pub fn num_surfaces(&self) -> usize {
        self.num_surfaces
    }

    /// Decodes one trial. `flipped` and `erased` are indexed by global outcome id.
    pub fn decode(&self, flipped: &[bool], erased: &[bool]) -> Result<DecodeVerdict> {
        self.run(flipped, erased, None)
    }

    pub fn decode_traced(&self, flipped: &[bool], erased: &[bool]) -> Result<DecodeTrace> {
        let mut trace = DecodeTrace::default();
        trace.verdict = self.run(flipped, erased, Some(&mut trace))?;
        Ok(trace)
    }

    /// Correction (global outcome ids) for the given input, ignoring surfaces.
    pub fn correction(&self, flipped: &[bool], erased: &[bool]) -> Result<Vec<usize>> {
        Ok(self.decode_traced(flipped, erased)?.correction)
    }

    fn run(
        &self,
        flipped: &[bool],
        erased: &[bool],
        mut trace: Option<&mut DecodeTrace>,
    ) -> Result<DecodeVerdict> {
        let n_out = self.graph.num_outcomes();
        if flipped.len() != n_out || erased.len() != n_out {
            return Err(Error::InvalidParameter(format!(
                "expected {n_out} outcomes, got {} flips and {} erasures",
                flipped.len(),
                erased.len()
            )));
        }
        let mut surf_erased = 0u8;
        let mut surf_flipped = 0u8;
        for s in 0..2 {
            let g = self.graph.species(s);
            let m = g.num_edges();
            let edge_flip: Vec<bool> = (0..m).map(|e| flipped[g.outcome(e)]).collect();
            let edge_erased: Vec<bool> = (0..m).map(|e| erased[g.outcome(e)]).collect();
            let mask = &self.surface_mask[s];
            let cells = Supercells::form(g, &edge_erased, mask);
            let syndrome = cells.syndrome(g, &edge_flip, &edge_erased);
            let defects: Vec<usize> = (0..g.num_nodes()).filter(|&v| syndrome[v]).collect();
            if defects.len() % 2 == 1 {
                return Err(Error::Decoder(format!(
                    "odd defect count {} in species {s}",
                    defects.len()
                )));
            }
            let cost: Vec<u32> = (0..m)
                .map(|e| if edge_erased[e] { 0 } else { self.edge_cost[s][e] })
                .collect();
            let toggles = match self.config.matcher {
                MatcherKind::Mwpm => {
                    let unit = cost.iter().all(|&c| c <= 1);
                    matching::match_defects(g, &defects, &cost, &edge_erased, unit)
                }
                MatcherKind::UnionFind => {
                    let mut node_defect = vec![false; g.num_nodes()];
                    for e in 0..m {
                        if edge_flip[e] && !edge_erased[e] {
                            let [a, b] = g.ends(e);
                            node_defect[a as usize] ^= true;
                            node_defect[b as usize] ^= true;
                        }
                    }
                    uf::uf_decode(g, &node_defect, &edge_erased, &cost)
                }
            };
            let mut residual = edge_flip;
            for &e in &toggles {
                residual[e] ^= true;
            }
            if cells.syndrome(g, &residual, &edge_erased).iter().any(|&b| b) {
                return Err(Error::Decoder(format!(
                    "correction leaves defects in species {s}"
                )));
            }
            let mut parity = 0u8;
            for e in 0..m {
                if residual[e] && !edge_erased[e] {
                    parity ^= cells.deformed_mask(g, e, mask);
                }
            }
            let species_mask: u8 = mask.iter().fold(0, |a, &b| a | b);
            surf_erased |= cells.erased_surfaces() & species_mask;
            surf_flipped |= parity & species_mask;

            if let Some(t) = trace.as_deref_mut() {
                let base = s * g.num_nodes();
                t.defects.extend(defects.iter().map(|&v| base + v));
                t.correction.extend(toggles.iter().map(|&e| g.outcome(e)));
            }
        }
        let verdict = DecodeVerdict {
            logical_erasure: surf_erased != 0,
            logical_error: surf_flipped & !surf_erased != 0,
        };
        if let Some(t) = trace {
            t.erased = (0..n_out).filter(|&o| erased[o]).collect();
            t.correction.sort_unstable();
            t.surface_erased = (0..self.num_surfaces).map(|k| surf_erased >> k & 1 == 1).collect();
            t.surface_flipped =
                (0..self.num_surfaces).map(|k| surf_flipped >> k & 1 == 1).collect();
        }
        Ok(verdict)
    }
}

/// Outcome type of a global outcome id.
pub fn outcome_kind(outcome: usize) -> OutcomeKind {
    if outcome % 2 == 0 {
        OutcomeKind::XX
    } else {
        OutcomeKind::ZZ
    }
}
