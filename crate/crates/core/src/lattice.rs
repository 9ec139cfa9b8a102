//! Honeycomb torus, its time foliation and the syndrome graph of the fusion network.
//!
//! Faces of the honeycomb sit on a triangular lattice with integer coordinates
//! `(i, j)`; the colour of a face is `(i - j) mod 3`. The torus is the quotient
//! by the periods `(L, L)` and `(L, -2L)`, which preserve colour, so there are
//! `3L²` faces, `6L²` vertices (one emitter each) and `9L²` edges.
//!
//! Every vertex carries a periodic chain of `6L` encoded qubits. Layer `t` fuses
//! the encoded qubits at time `t` across every edge of colour `t mod 3`.
//!
//! A check is attached to every face `f` of colour `c` and every centre time
//! `t_c ≡ c (mod 3)`. It multiplies the `ZZ` outcomes at `t_c ± 2` and the `XX`
//! outcomes at `t_c ± 1` over the boundary edges of `f`; twelve outcomes in all.
//! Each outcome lies in exactly two checks, so the checks split into two
//! species (parity of `t_c`), each forming an ordinary graph.

use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};

/// Face / edge colour. The edge colour is the colour of the two faces it joins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Red,
    Green,
    Blue,
}

impl Colour {
    pub const ALL: [Colour; 3] = [Colour::Red, Colour::Green, Colour::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Colour {
        Colour::ALL[i % 3]
    }

    /// Colour fused on a given layer.
    pub fn of_layer(t: usize) -> Colour {
        Colour::from_index(t % 3)
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Colour::Red => "r",
            Colour::Green => "g",
            Colour::Blue => "b",
        };
        f.write_str(s)
    }
}

/// Which parity a fusion outcome reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OutcomeKind {
    XX,
    ZZ,
}

impl OutcomeKind {
    pub fn index(self) -> usize {
        match self {
            OutcomeKind::XX => 0,
            OutcomeKind::ZZ => 1,
        }
    }
}

/// Edge of the honeycomb. `ends` are emitter (vertex) ids, `faces` the two
/// faces of other colours on either side.
#[derive(Clone, Debug, Serialize)]
pub struct HexEdge {
    pub colour: Colour,
    pub ends: [u32; 2],
    pub faces: [u32; 2],
    /// Lattice displacement from `faces[0]` to `faces[1]`.
    #[serde(skip)]
    disp: (i8, i8),
}

/// One encoded fusion of the logical cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FusionSlot {
    pub layer: u32,
    pub colour: Colour,
    pub edge: u32,
    pub emitter_a: u32,
    pub emitter_b: u32,
    /// Faces bordering the fused edge.
    pub cell_neighbors: [u32; 2],
}

/// The sFFCC lattice on an `L × L` torus of three-face unit cells.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    l: usize,
    edges: Vec<HexEdge>,
    vertex_edges: Vec<[u32; 3]>,
}

/// Integer triangular-lattice position of a face.
fn face_position(l: usize, f: usize) -> (i64, i64) {
    let c = (f % 3) as i64;
    let ab = f / 3;
    let a = (ab / l) as i64;
    let b = (ab % l) as i64;
    (a + b + c, a - 2 * b)
}

fn face_at(l: usize, i: i64, j: i64) -> usize {
    let l = l as i64;
    let c = (i - j).rem_euclid(3);
    let b = (i - j - c) / 3;
    let a = j + 2 * b;
    ((a.rem_euclid(l) * l + b.rem_euclid(l)) * 3 + c) as usize
}

const DIRS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, -1)];

impl LatticeSpec {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidParameter(format!(
                "code distance must be at least 2, got {l}"
            )));
        }
        let faces = 3 * l * l;
        let up = |i: i64, j: i64| (2 * face_at(l, i, j)) as u32;
        let down = |i: i64, j: i64| (2 * face_at(l, i, j) + 1) as u32;
        let mut edges = Vec::with_capacity(3 * faces);
        for f in 0..faces {
            let (i, j) = face_position(l, f);
            for (k, &(di, dj)) in DIRS.iter().enumerate() {
                let g = face_at(l, i + di, j + dj);
                let ends = match k {
                    0 => [up(i, j), down(i, j - 1)],
                    1 => [up(i, j), down(i - 1, j)],
                    _ => [up(i, j - 1), down(i, j - 1)],
                };
                let colour = Colour::from_index(3 - f % 3 - g % 3);
                edges.push(HexEdge {
                    colour,
                    ends,
                    faces: [f as u32, g as u32],
                    disp: (di as i8, dj as i8),
                });
            }
        }
        // Group edges by colour so layer slots index a contiguous block.
        edges.sort_by_key(|e| e.colour);
        let mut vertex_edges = vec![[u32::MAX; 3]; 2 * faces];
        for (id, e) in edges.iter().enumerate() {
            for &v in &e.ends {
                let slot = &mut vertex_edges[v as usize][e.colour.index()];
                debug_assert_eq!(*slot, u32::MAX);
                *slot = id as u32;
            }
        }
        Ok(LatticeSpec { l, edges, vertex_edges })
    }

    pub fn distance(&self) -> usize {
        self.l
    }

    pub fn layers(&self) -> usize {
        6 * self.l
    }

    pub fn num_faces(&self) -> usize {
        3 * self.l * self.l
    }

    pub fn num_emitters(&self) -> usize {
        6 * self.l * self.l
    }

    pub fn slots_per_layer(&self) -> usize {
        3 * self.l * self.l
    }

    pub fn num_slots(&self) -> usize {
        self.layers() * self.slots_per_layer()
    }

    pub fn face_colour(&self, f: usize) -> Colour {
        Colour::from_index(f % 3)
    }

    pub fn edges(&self) -> &[HexEdge] {
        &self.edges
    }

    /// Edge of the given colour incident to an emitter.
    pub fn emitter_edge(&self, v: usize, c: Colour) -> usize {
        self.vertex_edges[v][c.index()] as usize
    }

    /// Boundary edges of a face: each face touches three edges of each of the
    /// two other colours.
    pub fn face_boundary(&self, f: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].faces.contains(&(f as u32)))
            .collect()
    }

    pub fn slot(&self, id: usize) -> FusionSlot {
        let per = self.slots_per_layer();
        let t = id / per;
        let colour = Colour::of_layer(t);
        let edge = colour.index() * per + id % per;
        let e = &self.edges[edge];
        debug_assert_eq!(e.colour, colour);
        FusionSlot {
            layer: t as u32,
            colour,
            edge: edge as u32,
            emitter_a: e.ends[0],
            emitter_b: e.ends[1],
            cell_neighbors: e.faces,
        }
    }

    /// Slot id of the fusion on `edge` at layer `t`; `None` if the edge is not
    /// fused on that layer.
    pub fn slot_id(&self, t: usize, edge: usize) -> Option<usize> {
        let per = self.slots_per_layer();
        let colour = self.edges[edge].colour;
        (Colour::of_layer(t) == colour).then(|| t * per + edge - colour.index() * per)
    }

    /// Slot ids fused on layer `t`.
    pub fn layer_slots(&self, t: usize) -> std::ops::Range<usize> {
        let per = self.slots_per_layer();
        t * per..(t + 1) * per
    }
}

/// Canonical id of an outcome: `2 * slot + kind`.
pub fn outcome_id(slot: usize, kind: OutcomeKind) -> usize {
    2 * slot + kind.index()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub face: u32,
    pub colour: Colour,
    pub centre: u32,
    pub species: u8,
}

/// Spatial direction normal to a logical correlation surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CutDirection {
    U,
    W,
}

/// A nonlocal product of outcomes within one species that is a stabiliser of
/// the fusion network; its parity is the logical measurement.
#[derive(Clone, Debug, Serialize)]
pub struct LogicalSurface {
    pub species: u8,
    pub normal: CutDirection,
    /// Species-local edge ids.
    pub edges: Vec<u32>,
}

/// Graph of one check species: vertices are checks, edges are outcomes.
#[derive(Clone, Debug)]
pub struct SpeciesGraph {
    pub species: u8,
    num_nodes: usize,
    /// Global outcome id of each local edge.
    edge_outcome: Vec<u32>,
    edge_ends: Vec<[u32; 2]>,
    adj_start: Vec<u32>,
    adj: Vec<(u32, u32)>,
}

impl SpeciesGraph {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edge_ends.len()
    }

    pub fn ends(&self, e: usize) -> [u32; 2] {
        self.edge_ends[e]
    }

    pub fn outcome(&self, e: usize) -> usize {
        self.edge_outcome[e] as usize
    }

    /// `(neighbour, edge)` pairs incident to node `v`.
    pub fn neighbours(&self, v: usize) -> &[(u32, u32)] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }
}

/// Checks, species graphs and logical surfaces of a lattice.
#[derive(Clone, Debug)]
pub struct SyndromeGraph {
    spec: LatticeSpec,
    checks: Vec<Check>,
    /// Per outcome: species, species-local edge id.
    outcome_edge: Vec<(u8, u32)>,
    species: [SpeciesGraph; 2],
    cuts: Vec<LogicalSurface>,
}

/// Centre-time offset for face colour `c` and species `s`: the residue mod 6
/// congruent to `c` mod 3 and `s` mod 2.
fn centre_residue(c: usize, s: usize) -> usize {
    (0..6).find(|r| r % 3 == c && r % 2 == s).unwrap()
}

impl SyndromeGraph {
    pub fn new(spec: LatticeSpec) -> Self {
        let l = spec.l;
        let t_len = spec.layers();
        let faces = spec.num_faces();
        let per_species = faces * l;
        let mut checks = Vec::with_capacity(2 * per_species);
        for s in 0..2 {
            for f in 0..faces {
                let c = f % 3;
                for k in 0..l {
                    checks.push(Check {
                        face: f as u32,
                        colour: Colour::from_index(c),
                        centre: (centre_residue(c, s) + 6 * k) as u32,
                        species: s as u8,
                    });
                }
            }
        }
        let local_check = |f: usize, tc: usize| -> (usize, usize) {
            let s = tc % 2;
            let r = centre_residue(f % 3, s);
            debug_assert_eq!(tc % 3, f % 3);
            (s, f * l + (tc + t_len - r) % t_len / 6)
        };

        let n_outcomes = 2 * spec.num_slots();
        let mut outcome_edge = vec![(0u8, 0u32); n_outcomes];
        let mut edge_outcome: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        let mut edge_ends: [Vec<[u32; 2]>; 2] = [Vec::new(), Vec::new()];
        // Cut membership per species-local edge: U, W.
        let mut crossing: [Vec<[bool; 2]>; 2] = [Vec::new(), Vec::new()];
        let modulus = 3 * l as i64;
        for slot in 0..spec.num_slots() {
            let fs = spec.slot(slot);
            let t = fs.layer as usize;
            let e = &spec.edges[fs.edge as usize];
            let cprime = e.colour.index();
            for kind in [OutcomeKind::XX, OutcomeKind::ZZ] {
                let delta = match kind {
                    OutcomeKind::XX => 1,
                    OutcomeKind::ZZ => 2,
                };
                // The face whose colour is c'+1 sits at t+1 (XX) or t-2 (ZZ); the
                // other face at t-1 (XX) or t+2 (ZZ).
                let (early_colour, late_colour) = match kind {
                    OutcomeKind::XX => ((cprime + 2) % 3, (cprime + 1) % 3),
                    OutcomeKind::ZZ => ((cprime + 1) % 3, (cprime + 2) % 3),
                };
                let f0 = e.faces[0] as usize;
                let f1 = e.faces[1] as usize;
                let (early, late, forward) = if f0 % 3 == early_colour {
                    debug_assert_eq!(f1 % 3, late_colour);
                    (f0, f1, true)
                } else {
                    (f1, f0, false)
                };
                let te = (t + t_len - delta) % t_len;
                let tl = (t + delta) % t_len;
                let (s, a) = local_check(early, te);
                let (s2, b) = local_check(late, tl);
                debug_assert_eq!(s, s2);
                let id = edge_ends[s].len();
                edge_ends[s].push([a as u32, b as u32]);
                edge_outcome[s].push(outcome_id(slot, kind) as u32);
                outcome_edge[outcome_id(slot, kind)] = (s as u8, id as u32);

                // Lifted displacement from the early face to the late face.
                let (di, dj) = if forward {
                    (e.disp.0 as i64, e.disp.1 as i64)
                } else {
                    (-(e.disp.0 as i64), -(e.disp.1 as i64))
                };
                let (i, j) = face_position(l, early);
                let u0 = (2 * i + j).rem_euclid(modulus);
                let w0 = (i - j).rem_euclid(modulus);
                let u1 = u0 + 2 * di + dj;
                let w1 = w0 + di - dj;
                let wraps = |x: i64| !(0..modulus).contains(&x);
                crossing[s].push([wraps(u1), wraps(w1)]);
            }
        }

        let species = [0usize, 1].map(|s| {
            let n = per_species;
            let ends = std::mem::take(&mut edge_ends[s]);
            let mut deg = vec![0u32; n + 1];
            for &[a, b] in &ends {
                deg[a as usize + 1] += 1;
                deg[b as usize + 1] += 1;
            }
            for v in 0..n {
                deg[v + 1] += deg[v];
            }
            let mut fill = deg.clone();
            let mut adj = vec![(0u32, 0u32); 2 * ends.len()];
            for (id, &[a, b]) in ends.iter().enumerate() {
                adj[fill[a as usize] as usize] = (b, id as u32);
                fill[a as usize] += 1;
                adj[fill[b as usize] as usize] = (a, id as u32);
                fill[b as usize] += 1;
            }
            SpeciesGraph {
                species: s as u8,
                num_nodes: n,
                edge_outcome: std::mem::take(&mut edge_outcome[s]),
                edge_ends: ends,
                adj_start: deg,
                adj,
            }
        });

        let mut cuts = Vec::new();
        for s in 0..2 {
            for (k, normal) in [CutDirection::U, CutDirection::W]
                .into_iter()
                .enumerate()
            {
                let edges = crossing[s]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c[k])
                    .map(|(id, _)| id as u32)
                    .collect();
                cuts.push(LogicalSurface { species: s as u8, normal, edges });
            }
        }

        SyndromeGraph { spec, checks, outcome_edge, species, cuts }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn species(&self, s: usize) -> &SpeciesGraph {
        &self.species[s]
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcome_edge.len()
    }

    /// Species and species-local edge id of an outcome.
    pub fn locate(&self, outcome: usize) -> (usize, usize) {
        let (s, e) = self.outcome_edge[outcome];
        (s as usize, e as usize)
    }

    /// Global check ids containing an outcome.
    pub fn outcome_checks(&self, outcome: usize) -> [usize; 2] {
        let (s, e) = self.locate(outcome);
        let base = s * self.species[0].num_nodes();
        let [a, b] = self.species[s].ends(e);
        [base + a as usize, base + b as usize]
    }

    /// Outcomes of one check, in global outcome ids.
    pub fn check_support(&self, check: usize) -> Vec<usize> {
        let n = self.species[0].num_nodes();
        let (s, v) = (check / n, check % n);
        let g = &self.species[s];
        let mut out: Vec<usize> =
            g.neighbours(v).iter().map(|&(_, e)| g.outcome(e as usize)).collect();
        out.sort_unstable();
        out
    }

    /// Every spatial cut: two normals per species.
    pub fn all_cuts(&self) -> &[LogicalSurface] {
        &self.cuts
    }

    pub fn cut(&self, species: usize, normal: CutDirection) -> &LogicalSurface {
        self.cuts
            .iter()
            .find(|c| c.species as usize == species && c.normal == normal)
            .unwrap()
    }

    /// The logical surfaces scored by the decoder.
    pub fn logical_surfaces(&self, selection: SurfaceSelection) -> Vec<&LogicalSurface> {
        match selection {
            SurfaceSelection::OneQubit => {
                vec![self.cut(0, CutDirection::U), self.cut(1, CutDirection::W)]
            }
            SurfaceSelection::AllSpatial => self.cuts.iter().collect(),
        }
    }

    /// Product of outcomes along each surface, as `true` for −1.
    ///
    /// `flipped` holds the outcome sign bits and `erased` the erasure flags, both
    /// indexed by global outcome id. Errors if an erased outcome lies on a surface.
    pub fn logical_parity(
        &self,
        surfaces: &[&LogicalSurface],
        flipped: &[bool],
        erased: &[bool],
    ) -> Result<Vec<bool>> {
        surfaces
            .iter()
            .map(|surf| {
                let g = &self.species[surf.species as usize];
                let mut parity = false;
                for &e in &surf.edges {
                    let o = g.outcome(e as usize);
                    if erased[o] {
                        return Err(Error::ErasedLogical);
                    }
                    parity ^= flipped[o];
                }
                Ok(parity)
            })
            .collect()
    }

    /// Check values (`true` = −1) for a given assignment of outcome signs.
    pub fn syndrome(&self, flipped: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.checks.len()];
        for (o, &f) in flipped.iter().enumerate() {
            if f {
                for c in self.outcome_checks(o) {
                    out[c] ^= true;
                }
            }
        }
        out
    }
}

/// Which logical surfaces count towards a logical failure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceSelection {
    /// One conjugate pair: species 0 normal to U and species 1 normal to W.
    #[default]
    OneQubit,
    /// Both spatial normals in both species.
    AllSpatial,
}

/// Serialisable view of the lattice for debugging dumps.
#[derive(Serialize)]
pub struct LatticeDump<'a> {
    pub distance: usize,
    pub layers: usize,
    pub emitters: usize,
    pub faces: Vec<Colour>,
    pub edges: &'a [HexEdge],
    pub checks: &'a [Check],
    pub outcome_checks: Vec<[usize; 2]>,
    pub surfaces: Vec<SurfaceDump>,
}

#[derive(Serialize)]
pub struct SurfaceDump {
    pub species: u8,
    pub normal: CutDirection,
    pub outcomes: Vec<usize>,
}

impl SyndromeGraph {
    pub fn dump(&self) -> LatticeDump<'_> {
        let spec = &self.spec;
        LatticeDump {
            distance: spec.distance(),
            layers: spec.layers(),
            emitters: spec.num_emitters(),
            faces: (0..spec.num_faces()).map(|f| spec.face_colour(f)).collect(),
            edges: spec.edges(),
            checks: &self.checks,
            outcome_checks: (0..self.num_outcomes()).map(|o| self.outcome_checks(o)).collect(),
            surfaces: self
                .cuts
                .iter()
                .map(|c| {
                    let g = &self.species[c.species as usize];
                    SurfaceDump {
                        species: c.species,
                        normal: c.normal,
                        outcomes: c.edges.iter().map(|&e| g.outcome(e as usize)).collect(),
                    }
                })
                .collect(),
        }
    }
}
