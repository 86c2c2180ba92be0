// SPDX-License-Identifier: Apache-2.0
//! Directed acyclic graphs, reachability and causal orderings.
//!
//! Nodes are the integers `0..d`. Every [`Dag`] is validated on
//! construction (no self-loops, no duplicate edges, no directed cycle) and
//! immutable afterwards; its reachability matrix is computed once and
//! cached, so ancestor and descendant queries are bitset lookups.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;

use crate::error::{Error, Result};

/// A subset of the nodes, iterated in ascending order.
pub type NodeSet = BTreeSet<usize>;

/// Reflexive, transitively closed reachability relation of a DAG.
///
/// Entry `(j, i)` is set iff `j` is an ancestor of `i` or `j == i`.
#[derive(Clone, PartialEq, Eq)]
pub struct ReachMatrix {
    /// `rows[j]` = descendants of `j` including `j`.
    rows: Vec<FixedBitSet>,
    /// `cols[i]` = ancestors of `i` including `i`.
    cols: Vec<FixedBitSet>,
}

impl ReachMatrix {
    fn from_rows(rows: Vec<FixedBitSet>) -> Self {
        let d = rows.len();
        let mut cols = vec![FixedBitSet::with_capacity(d); d];
        for (j, row) in rows.iter().enumerate() {
            for i in row.ones() {
                cols[i].insert(j);
            }
        }
        Self { rows, cols }
    }

    /// Builds the relation from the sign pattern of a nonnegative matrix and
    /// checks that it is the reachability matrix of some DAG: unit diagonal,
    /// antisymmetric off the diagonal and transitively closed.
    pub fn from_sign_pattern(m: &ndarray::Array2<f64>) -> Result<Self> {
        let d = square_dim(m)?;
        let mut rows = vec![FixedBitSet::with_capacity(d); d];
        for ((j, i), &v) in m.indexed_iter() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidEntry {
                    row: j,
                    col: i,
                    value: v,
                    reason: "expected a finite nonnegative value",
                });
            }
            if v > 0.0 {
                rows[j].insert(i);
            }
        }
        let r = Self::from_rows(rows);
        r.validate()?;
        Ok(r)
    }

    /// Builds the relation from a 0/1 (or boolean-like) matrix.
    pub fn from_bool_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let d = rows.len();
        let mut bits = vec![FixedBitSet::with_capacity(d); d];
        for (j, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    cols: row.len(),
                });
            }
            for (i, &b) in row.iter().enumerate() {
                bits[j].set(i, b);
            }
        }
        let r = Self::from_rows(bits);
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        for j in 0..d {
            if !self.rows[j].contains(j) {
                return Err(Error::NotReachability(format!(
                    "diagonal entry {j} is zero"
                )));
            }
            for i in self.rows[j].ones() {
                if i != j && self.rows[i].contains(j) {
                    return Err(Error::NotReachability(format!(
                        "nodes {j} and {i} reach each other"
                    )));
                }
                if !self.rows[i].is_subset(&self.rows[j]) {
                    let k = self.rows[i].difference(&self.rows[j]).next().unwrap_or(i);
                    return Err(Error::NotReachability(format!(
                        "not transitively closed: {j} -> {i} -> {k} but not {j} -> {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `j ∈ An(i)`.
    #[inline]
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.rows[j].contains(i)
    }

    /// `j ∈ an(i)` (strict ancestor).
    #[inline]
    pub fn is_strict(&self, j: usize, i: usize) -> bool {
        j != i && self.rows[j].contains(i)
    }

    /// `De(j)` as a bitset.
    pub fn row(&self, j: usize) -> &FixedBitSet {
        &self.rows[j]
    }

    /// `An(i)` as a bitset.
    pub fn col(&self, i: usize) -> &FixedBitSet {
        &self.cols[i]
    }

    /// `|An(i) ∩ An(j)|`, the `(i, j)` entry of `RᵀR`.
    pub fn common_ancestor_count(&self, i: usize, j: usize) -> usize {
        self.cols[i].intersection_count(&self.cols[j])
    }

    /// `RᵀR` as a dense count matrix.
    pub fn gram(&self) -> ndarray::Array2<usize> {
        let d = self.dim();
        ndarray::Array2::from_shape_fn((d, d), |(i, j)| self.common_ancestor_count(i, j))
    }

    pub fn to_matrix(&self) -> ndarray::Array2<f64> {
        let d = self.dim();
        ndarray::Array2::from_shape_fn((d, d), |(j, i)| if self.get(j, i) { 1.0 } else { 0.0 })
    }
}

impl fmt::Debug for ReachMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        let mut list = f.debug_list();
        for j in 0..d {
            let row: String = (0..d)
                .map(|i| if self.get(j, i) { '1' } else { '0' })
                .collect();
            list.entry(&row);
        }
        list.finish()
    }
}

pub(crate) fn square_dim<T>(m: &ndarray::Array2<T>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    if r == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(r)
}

/// Ancestral sets of a single node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestralSets {
    /// `an(i)`
    pub ancestors: NodeSet,
    /// `An(i) = an(i) ∪ {i}`
    pub ancestors_and_self: NodeSet,
    /// `pa(i)`
    pub parents: NodeSet,
    /// `de(i)`
    pub descendants: NodeSet,
    /// `De(i) = de(i) ∪ {i}`
    pub descendants_and_self: NodeSet,
}

/// A directed acyclic graph on the nodes `0..d`.
#[derive(Clone, PartialEq, Eq)]
pub struct Dag {
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    reach: ReachMatrix,
}

impl Dag {
    /// Builds a DAG from an edge list `(from, to)`.
    ///
    /// Fails on out-of-range nodes, self-loops, duplicate edges or cycles.
    pub fn new<I>(d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if d == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut parents = vec![Vec::new(); d];
        let mut children = vec![Vec::new(); d];
        for (k, i) in edges {
            for node in [k, i] {
                if node >= d {
                    return Err(Error::NodeOutOfRange { node, d });
                }
            }
            if k == i {
                return Err(Error::SelfLoop(k));
            }
            children[k].push(i);
            parents[i].push(k);
        }
        for (k, ch) in children.iter_mut().enumerate() {
            ch.sort_unstable();
            if let Some(w) = ch.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(k, w[0]));
            }
        }
        for pa in parents.iter_mut() {
            pa.sort_unstable();
        }
        let topo = kahn(&parents, &children)?;
        let reach = closure(&children, &topo);
        Ok(Self {
            parents,
            children,
            topo,
            reach,
        })
    }

    /// The graph on `d` nodes without edges.
    pub fn empty(d: usize) -> Result<Self> {
        Self::new(d, std::iter::empty())
    }

    /// The DAG with the fewest edges whose reachability matrix is `reach`:
    /// `j -> i` iff `j ∈ an(i)` and no third node lies strictly between.
    pub fn from_reachability(reach: &ReachMatrix) -> Self {
        let d = reach.dim();
        let mut edges = Vec::new();
        for j in 0..d {
            for i in reach.row(j).ones() {
                if i == j {
                    continue;
                }
                let between = reach
                    .row(j)
                    .intersection(reach.col(i))
                    .any(|k| k != j && k != i);
                if !between {
                    edges.push((j, i));
                }
            }
        }
        Self::new(d, edges).expect("a valid reachability relation is acyclic")
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// All edges `(from, to)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(k, ch)| ch.iter().map(move |&i| (k, i)))
    }

    pub fn has_edge(&self, k: usize, i: usize) -> bool {
        self.children
            .get(k)
            .is_some_and(|ch| ch.binary_search(&i).is_ok())
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// A topological order computed at construction (Kahn, smallest index
    /// first among the available nodes).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn reach(&self) -> &ReachMatrix {
        &self.reach
    }

    pub fn reachability_matrix(&self) -> ReachMatrix {
        self.reach.clone()
    }

    /// `j ∈ an(i)`.
    pub fn is_ancestor(&self, j: usize, i: usize) -> bool {
        self.reach.is_strict(j, i)
    }

    pub fn ancestors(&self, i: usize) -> NodeSet {
        self.reach.col(i).ones().filter(|&k| k != i).collect()
    }

    pub fn descendants(&self, i: usize) -> NodeSet {
        self.reach.row(i).ones().filter(|&k| k != i).collect()
    }

    /// `|An(i)|`
    pub fn ancestor_count_incl(&self, i: usize) -> usize {
        self.reach.col(i).count_ones(..)
    }

    pub fn ancestral_sets(&self, i: usize) -> Result<AncestralSets> {
        self.check_node(i)?;
        let ancestors = self.ancestors(i);
        let descendants = self.descendants(i);
        let mut ancestors_and_self = ancestors.clone();
        ancestors_and_self.insert(i);
        let mut descendants_and_self = descendants.clone();
        descendants_and_self.insert(i);
        Ok(AncestralSets {
            ancestors,
            ancestors_and_self,
            parents: self.parents[i].iter().copied().collect(),
            descendants,
            descendants_and_self,
        })
    }

    /// Nodes without parents.
    pub fn initial_nodes(&self) -> NodeSet {
        (0..self.node_count())
            .filter(|&i| self.parents[i].is_empty())
            .collect()
    }

    /// Nodes without children.
    pub fn terminal_nodes(&self) -> NodeSet {
        (0..self.node_count())
            .filter(|&i| self.children[i].is_empty())
            .collect()
    }

    /// Removes every edge `k -> i` for which another path from `k` to `i`
    /// exists.
    pub fn transitive_reduction(&self) -> Dag {
        let edges = self.edges().filter(|&(k, i)| {
            !self.children[k]
                .iter()
                .any(|&c| c != i && self.reach.get(c, i))
        });
        Dag::new(self.node_count(), edges.collect::<Vec<_>>())
            .expect("a subgraph of a DAG is a DAG")
    }

    /// The same graph with every edge reversed.
    pub fn reversed(&self) -> Dag {
        Dag::new(
            self.node_count(),
            self.edges().map(|(k, i)| (i, k)).collect::<Vec<_>>(),
        )
        .expect("reversing a DAG keeps it acyclic")
    }

    /// True if the underlying undirected graph has no cycle.
    pub fn is_polytree(&self) -> bool {
        let d = self.node_count();
        let mut uf: Vec<usize> = (0..d).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for (k, i) in self.edges() {
            let (a, b) = (find(&mut uf, k), find(&mut uf, i));
            if a == b {
                return false;
            }
            uf[a] = b;
        }
        true
    }

    /// True iff `σ(j) < σ(i)` for every `i` and every `j ∈ an(i)`.
    pub fn validate_causal_ordering(&self, sigma: &CausalOrdering) -> Result<bool> {
        if sigma.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                found: sigma.len(),
            });
        }
        // Edges generate the ancestor relation, so checking them suffices.
        Ok(self.edges().all(|(k, i)| sigma.rank(k) < sigma.rank(i)))
    }

    /// A uniformly chosen linear extension step by step: Kahn's algorithm
    /// picking a random available node each time.
    pub fn random_causal_ordering<R: Rng + ?Sized>(&self, rng: &mut R) -> CausalOrdering {
        let d = self.node_count();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut avail: Vec<usize> = (0..d).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(d);
        while !avail.is_empty() {
            let pick = rng.random_range(0..avail.len());
            let k = avail.swap_remove(pick);
            order.push(k);
            for &c in &self.children[k] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    avail.push(c);
                }
            }
        }
        CausalOrdering::from_order(order).expect("Kahn order is a permutation")
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: i,
                d: self.node_count(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dag")
            .field("d", &self.node_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

fn kahn(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Result<Vec<usize>> {
    let d = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    // Min-heap on node index keeps the order canonical.
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..d)
        .filter(|&i| indeg[i] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(d);
    while let Some(std::cmp::Reverse(k)) = ready.pop() {
        order.push(k);
        for &c in &children[k] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(std::cmp::Reverse(c));
            }
        }
    }
    if order.len() < d {
        let stuck = (0..d).find(|&i| indeg[i] > 0).unwrap_or(0);
        return Err(Error::Cycle(stuck));
    }
    Ok(order)
}

fn closure(children: &[Vec<usize>], topo: &[usize]) -> ReachMatrix {
    let d = children.len();
    let mut rows = vec![FixedBitSet::with_capacity(d); d];
    for &k in topo.iter().rev() {
        let mut row = FixedBitSet::with_capacity(d);
        row.insert(k);
        for &c in &children[k] {
            row.union_with(&rows[c]);
        }
        rows[k] = row;
    }
    ReachMatrix::from_rows(rows)
}

/// Breadth-first descendants, used by tests as an independent route.
#[doc(hidden)]
pub fn bfs_descendants(dag: &Dag, start: usize) -> NodeSet {
    let mut seen = NodeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        for &c in dag.children(k) {
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
    }
    seen
}

/// A permutation `σ` of the nodes, stored both as ranks and as the node
/// sequence it induces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CausalOrdering {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl CausalOrdering {
    /// From the node sequence: `order[0]` gets rank 0, and so on.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let d = order.len();
        let mut rank = vec![usize::MAX; d];
        for (pos, &node) in order.iter().enumerate() {
            if node >= d {
                return Err(Error::NotAPermutation {
                    d,
                    detail: format!("node {node} out of range"),
                });
            }
            if rank[node] != usize::MAX {
                return Err(Error::NotAPermutation {
                    d,
                    detail: format!("node {node} repeated"),
                });
            }
            rank[node] = pos;
        }
        Ok(Self { order, rank })
    }

    /// From the ranks: node `i` gets rank `ranks[i]`.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        let d = ranks.len();
        let mut order = vec![usize::MAX; d];
        for (node, &r) in ranks.iter().enumerate() {
            if r >= d || order[r] != usize::MAX {
                return Err(Error::NotAPermutation {
                    d,
                    detail: format!("rank {r} of node {node} invalid or repeated"),
                });
            }
            order[r] = node;
        }
        Ok(Self { order, rank: ranks })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            order: (0..d).collect(),
            rank: (0..d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `σ(node)`, 0-based.
    #[inline]
    pub fn rank(&self, node: usize) -> usize {
        self.rank[node]
    }

    /// Nodes sorted by rank.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// D₁: 1→3, 1→4, 2→3, 2→4, 3→4 (1-based).
    fn d1() -> Dag {
        Dag::new(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn set(xs: &[usize]) -> NodeSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn ancestral_sets_of_d1() {
        let s = d1().ancestral_sets(3).unwrap();
        assert_eq!(s.ancestors, set(&[0, 1, 2]));
        assert_eq!(s.parents, set(&[0, 1, 2]));
        assert!(s.descendants.is_empty());
        assert_eq!(s.descendants_and_self, set(&[3]));
    }

    #[test]
    fn single_node_and_chain() {
        let one = Dag::empty(1).unwrap();
        let s = one.ancestral_sets(0).unwrap();
        assert!(s.ancestors.is_empty());
        assert_eq!(s.ancestors_and_self, set(&[0]));

        let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            chain.ancestral_sets(2).unwrap().ancestors_and_self,
            set(&[0, 1, 2])
        );
        assert_eq!(chain.ancestral_sets(0).unwrap().descendants, set(&[1, 2]));
        assert!(matches!(
            chain.ancestral_sets(3),
            Err(Error::NodeOutOfRange { node: 3, d: 3 })
        ));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Dag::new(2, [(0, 0)]), Err(Error::SelfLoop(0)));
        assert_eq!(
            Dag::new(2, [(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Dag::new(3, [(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(
            Dag::new(2, [(0, 2)]),
            Err(Error::NodeOutOfRange { .. })
        ));
        assert_eq!(Dag::empty(0), Err(Error::EmptyGraph));
    }

    #[test]
    fn reachability_examples() {
        let two = Dag::new(2, [(0, 1)]).unwrap();
        assert_eq!(
            two.reach().to_matrix(),
            ndarray::array![[1.0, 1.0], [0.0, 1.0]]
        );

        let r = d1().reachability_matrix();
        assert!((0..4).all(|j| r.get(j, 3)));

        let e = Dag::empty(3).unwrap().reachability_matrix();
        assert_eq!(e.to_matrix(), ndarray::Array2::eye(3));
    }

    #[test]
    fn transitive_reduction_examples() {
        let tri = Dag::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            tri.transitive_reduction().edges().collect::<Vec<_>>(),
            [(0, 1), (1, 2)]
        );

        let red = d1().transitive_reduction();
        assert_eq!(red.edges().collect::<Vec<_>>(), [(0, 2), (1, 2), (2, 3)]);
        assert_eq!(red.reachability_matrix(), d1().reachability_matrix());

        let e = Dag::empty(4).unwrap();
        assert_eq!(e.transitive_reduction(), e);
    }

    #[test]
    fn causal_ordering_examples() {
        let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(chain
            .validate_causal_ordering(&CausalOrdering::identity(3))
            .unwrap());
        let rev = CausalOrdering::from_order(vec![2, 1, 0]).unwrap();
        assert!(!chain.validate_causal_ordering(&rev).unwrap());

        // σ(2)=1, σ(1)=2, σ(3)=3, σ(4)=4 in 1-based labels.
        let sigma = CausalOrdering::from_ranks(vec![1, 0, 2, 3]).unwrap();
        assert!(d1().validate_causal_ordering(&sigma).unwrap());

        assert!(CausalOrdering::from_order(vec![0, 0, 1]).is_err());
        assert!(CausalOrdering::from_ranks(vec![0, 3, 1]).is_err());
        assert!(matches!(
            chain.validate_causal_ordering(&CausalOrdering::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sign_pattern_validation() {
        let ok = ndarray::array![[1.0, 0.5, 0.2], [0.0, 1.0, 0.3], [0.0, 0.0, 1.0]];
        let r = ReachMatrix::from_sign_pattern(&ok).unwrap();
        assert_eq!(
            Dag::from_reachability(&r).edges().collect::<Vec<_>>(),
            [(0, 1), (1, 2)]
        );

        let not_closed = ndarray::array![[1.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.0, 0.0, 1.0]];
        assert!(matches!(
            ReachMatrix::from_sign_pattern(&not_closed),
            Err(Error::NotReachability(_))
        ));
        let cyclic = ndarray::array![[1.0, 0.5], [0.5, 1.0]];
        assert!(ReachMatrix::from_sign_pattern(&cyclic).is_err());
        let zero_diag = ndarray::array![[1.0, 0.5], [0.0, 0.0]];
        assert!(ReachMatrix::from_sign_pattern(&zero_diag).is_err());
    }

    #[test]
    fn initial_terminal_polytree() {
        let g = d1();
        assert_eq!(g.initial_nodes(), set(&[0, 1]));
        assert_eq!(g.terminal_nodes(), set(&[3]));
        assert!(!g.is_polytree());
        assert!(Dag::new(4, [(0, 1), (2, 1), (1, 3)]).unwrap().is_polytree());
    }
}
