//! Minimum-weight matching of supercell defects by shortest paths.

use std::collections::{BinaryHeap, VecDeque};

use super::blossom::min_weight_perfect_matching;
use crate::lattice::SpeciesGraph;

const UNREACHED: u32 = u32::MAX;

/// Single-source shortest paths with erased edges at zero cost.
pub(crate) struct PathTree {
    pub dist: Vec<u32>,
    pub parent_edge: Vec<u32>,
}

pub(crate) fn shortest_paths(
    g: &SpeciesGraph,
    src: usize,
    edge_cost: &[u32],
    unit: bool,
) -> PathTree {
    let n = g.num_nodes();
    let mut dist = vec![UNREACHED; n];
    let mut parent_edge = vec![UNREACHED; n];
    dist[src] = 0;
    if unit {
        // 0-1 BFS.
        let mut dq = VecDeque::new();
        dq.push_back(src as u32);
        while let Some(v) = dq.pop_front() {
            let dv = dist[v as usize];
            for &(w, e) in g.neighbours(v as usize) {
                let c = edge_cost[e as usize];
                let nd = dv + c;
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    parent_edge[w as usize] = e;
                    if c == 0 {
                        dq.push_front(w);
                    } else {
                        dq.push_back(w);
                    }
                }
            }
        }
    } else {
        let mut heap = BinaryHeap::new();
        heap.push(std::cmp::Reverse((0u32, src as u32)));
        while let Some(std::cmp::Reverse((dv, v))) = heap.pop() {
            if dv > dist[v as usize] {
                continue;
            }
            for &(w, e) in g.neighbours(v as usize) {
                let nd = dv + edge_cost[e as usize];
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    parent_edge[w as usize] = e;
                    heap.push(std::cmp::Reverse((nd, w)));
                }
            }
        }
    }
    PathTree { dist, parent_edge }
}

/// Pairs defects by exact minimum-weight perfect matching and returns the
/// correction as species-local edges to toggle (erased edges excluded).
pub(crate) fn match_defects(
    g: &SpeciesGraph,
    defects: &[usize],
    edge_cost: &[u32],
    edge_erased: &[bool],
    unit: bool,
) -> Vec<usize> {
    let k = defects.len();
    if k == 0 {
        return Vec::new();
    }
    let trees: Vec<PathTree> =
        defects.iter().map(|&d| shortest_paths(g, d, edge_cost, unit)).collect();
    let mate = min_weight_perfect_matching(k, |i, j| trees[i].dist[defects[j]] as i64);
    let mut toggled = vec![false; g.num_edges()];
    for i in 0..k {
        let j = mate[i];
        if j < i {
            continue;
        }
        let tree = &trees[i];
        let mut v = defects[j];
        while v != defects[i] {
            let e = tree.parent_edge[v] as usize;
            if !edge_erased[e] {
                toggled[e] ^= true;
            }
            let [a, b] = g.ends(e);
            v = if a as usize == v { b as usize } else { a as usize };
        }
    }
    toggled.iter().enumerate().filter(|(_, &t)| t).map(|(e, _)| e).collect()
}
