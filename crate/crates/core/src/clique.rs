// SPDX-License-Identifier: Apache-2.0
//! Maximum clique enumeration on small dense-or-sparse undirected graphs.

use fixedbitset::FixedBitSet;

/// Undirected simple graph as adjacency bitsets.
#[derive(Debug, Clone)]
pub(crate) struct BitGraph {
    adj: Vec<FixedBitSet>,
}

impl BitGraph {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            adj: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub(crate) fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub(crate) fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub(crate) fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub(crate) fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[a].ones()
    }

    /// All cliques of maximum cardinality, each as a sorted node list.
    ///
    /// Bron–Kerbosch with Tomita pivoting; branches that cannot reach the
    /// best size found so far are cut.
    pub(crate) fn maximum_cliques(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut p = FixedBitSet::with_capacity(n);
        p.insert_range(..);
        let mut state = Search {
            g: self,
            best: 0,
            found: Vec::new(),
        };
        state.expand(&mut Vec::new(), p, FixedBitSet::with_capacity(n));
        let mut out = state.found;
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        out
    }
}

struct Search<'a> {
    g: &'a BitGraph,
    best: usize,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn expand(&mut self, r: &mut Vec<usize>, mut p: FixedBitSet, mut x: FixedBitSet) {
        let p_len = p.count_ones(..);
        if r.len() + p_len < self.best {
            return;
        }
        if p_len == 0 {
            if x.count_ones(..) == 0 {
                if r.len() > self.best {
                    self.best = r.len();
                    self.found.clear();
                }
                self.found.push(r.clone());
            }
            return;
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| self.g.adj[u].intersection_count(&p))
            .expect("p is non-empty");
        let candidates: Vec<usize> = p.difference(&self.g.adj[pivot]).collect();
        for v in candidates {
            let mut np = p.clone();
            np.intersect_with(&self.g.adj[v]);
            let mut nx = x.clone();
            nx.intersect_with(&self.g.adj[v]);
            r.push(v);
            self.expand(r, np, nx);
            r.pop();
            p.set(v, false);
            x.insert(v);
        }
    }
}
