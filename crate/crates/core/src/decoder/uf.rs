//! Union-find growth decoder with peeling.
//!
//! Odd clusters grow by half-edges until every cluster holds an even number of
//! defects; each cluster is then corrected by peeling a spanning forest of its
//! fully grown edges. Erased edges start fully grown.

use std::collections::VecDeque;

use crate::lattice::SpeciesGraph;

struct Clusters {
    parent: Vec<u32>,
    parity: Vec<bool>,
    nodes: Vec<Vec<u32>>,
}

impl Clusters {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            let p = self.parent[v] as usize;
            self.parent[v] = self.parent[p];
            v = p;
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) =
            if self.nodes[ra].len() >= self.nodes[rb].len() { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big as u32;
        self.parity[big] ^= self.parity[small];
        let moved = std::mem::take(&mut self.nodes[small]);
        self.nodes[big].extend(moved);
    }
}

/// Returns the species-local edges to toggle (erased edges excluded).
pub(crate) fn uf_decode(
    g: &SpeciesGraph,
    node_defect: &[bool],
    edge_erased: &[bool],
    edge_cost: &[u32],
) -> Vec<usize> {
    let n = g.num_nodes();
    let m = g.num_edges();
    let mut cl = Clusters {
        parent: (0..n as u32).collect(),
        parity: node_defect.to_vec(),
        nodes: (0..n as u32).map(|v| vec![v]).collect(),
    };
    // Growth in half-steps; an edge of cost c needs 2c half-steps.
    let mut support = vec![0u32; m];
    let mut grown = vec![false; m];
    for e in 0..m {
        if edge_erased[e] || edge_cost[e] == 0 {
            grown[e] = true;
            let [a, b] = g.ends(e);
            cl.union(a as usize, b as usize);
        }
    }
    loop {
        let odd: Vec<usize> = (0..n)
            .filter(|&v| cl.parent[v] as usize == v && cl.parity[v])
            .collect();
        if odd.is_empty() {
            break;
        }
        let mut fused = Vec::new();
        for r in odd {
            for &v in &cl.nodes[r] {
                for &(_, e) in g.neighbours(v as usize) {
                    let e = e as usize;
                    if !grown[e] {
                        support[e] += 1;
                        if support[e] >= 2 * edge_cost[e] {
                            grown[e] = true;
                            fused.push(e);
                        }
                    }
                }
            }
        }
        for e in fused {
            let [a, b] = g.ends(e);
            cl.union(a as usize, b as usize);
        }
    }

    // Peel a BFS forest of grown edges.
    let mut seen = vec![false; n];
    let mut defect = node_defect.to_vec();
    let mut toggled = vec![false; m];
    let mut order = Vec::with_capacity(n);
    let mut parent_edge = vec![u32::MAX; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let start = order.len();
        order.push(s);
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &(w, e) in g.neighbours(v) {
                if grown[e as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    parent_edge[w as usize] = e;
                    order.push(w as usize);
                    q.push_back(w as usize);
                }
            }
        }
        for &v in order[start..].iter().rev() {
            if defect[v] && parent_edge[v] != u32::MAX {
                let e = parent_edge[v] as usize;
                toggled[e] ^= true;
                let [a, b] = g.ends(e);
                let p = if a as usize == v { b } else { a } as usize;
                defect[v] = false;
                defect[p] ^= true;
            }
        }
    }
    (0..m).filter(|&e| toggled[e] && !edge_erased[e]).collect()
}
