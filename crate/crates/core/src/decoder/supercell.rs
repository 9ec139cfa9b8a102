//! Erasure absorption.
//!
//! Erased outcomes are contracted: checks joined by an erased edge merge into a
//! supercell whose value is the product of its members. Each logical surface
//! is deformed by multiplying it with member checks until it avoids every
//! erased edge. This is GF(2) elimination on the erased columns, done with a
//! union-find that carries one parity bit per surface ("potential"): the set of
//! member checks to multiply in is exactly the set with potential 1.
//!
//! An erased cycle with odd surface parity means no deformation exists for
//! that surface.

use crate::lattice::SpeciesGraph;

#[derive(Clone, Debug)]
pub struct Supercells {
    parent: Vec<u32>,
    /// Surface mask of the check stars to multiply in, relative to the parent.
    pot: Vec<u8>,
    size: Vec<u32>,
    /// Surfaces that cannot be routed around the erasure.
    erased_surfaces: u8,
    merges: usize,
}

impl Supercells {
    /// `edge_erased` and `surface_mask` are indexed by species-local edge.
    pub fn form(g: &SpeciesGraph, edge_erased: &[bool], surface_mask: &[u8]) -> Self {
        let n = g.num_nodes();
        let mut sc = Supercells {
            parent: (0..n as u32).collect(),
            pot: vec![0; n],
            size: vec![1; n],
            erased_surfaces: 0,
            merges: 0,
        };
        for e in 0..g.num_edges() {
            if edge_erased[e] {
                let [a, b] = g.ends(e);
                sc.union(a as usize, b as usize, surface_mask[e]);
            }
        }
        for v in 0..n {
            sc.find(v);
        }
        sc
    }

    fn find(&mut self, v: usize) -> (usize, u8) {
        let p = self.parent[v] as usize;
        if p == v {
            return (v, 0);
        }
        let (root, pp) = self.find(p);
        self.pot[v] ^= pp;
        self.parent[v] = root as u32;
        (root, self.pot[v])
    }

    /// Joins the ends of an erased edge. After the merge the edge's deformed
    /// mask `mask ^ pot(a) ^ pot(b)` is zero.
    fn union(&mut self, a: usize, b: usize, mask: u8) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        let need = mask ^ pa ^ pb;
        if ra == rb {
            self.erased_surfaces |= need;
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big as u32;
        self.pot[small] = need;
        self.size[big] += self.size[small];
        self.merges += 1;
    }

    /// Supercell representative of a check. Valid after `form`.
    pub fn root(&self, v: usize) -> usize {
        self.parent[v] as usize
    }

    /// Surfaces whose deformation multiplies in this check's star.
    pub fn potential(&self, v: usize) -> u8 {
        self.pot[v]
    }

    pub fn erased_surfaces(&self) -> u8 {
        self.erased_surfaces
    }

    /// Number of supercells (merged or singleton).
    pub fn count(&self) -> usize {
        self.parent.len() - self.merges
    }

    /// Mask of surfaces containing edge `e` after deformation.
    pub fn deformed_mask(&self, g: &SpeciesGraph, e: usize, surface_mask: &[u8]) -> u8 {
        let [a, b] = g.ends(e);
        surface_mask[e] ^ self.pot[a as usize] ^ self.pot[b as usize]
    }

    /// Supercell values from per-edge sign bits, indexed by representative.
    /// Erased edges contribute nothing.
    pub fn syndrome(&self, g: &SpeciesGraph, edge_flip: &[bool], edge_erased: &[bool]) -> Vec<bool> {
        let mut s = vec![false; g.num_nodes()];
        for e in 0..g.num_edges() {
            if edge_flip[e] && !edge_erased[e] {
                let [a, b] = g.ends(e);
                s[self.root(a as usize)] ^= true;
                s[self.root(b as usize)] ^= true;
            }
        }
        s
    }
}
