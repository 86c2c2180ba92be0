// SPDX-License-Identifier: Apache-2.0
//! Recovering standardized coefficient matrices from tail dependence.
//!
//! Given `χ` and side information (the reachability matrix, a causal
//! ordering or the set of initial nodes) the row recursion
//! `b̄_ji = χ(j, i) - Σ_{k before j} min(b̄_ki, b̄_kj)` inverts
//! [`tdm_from_std_mlcm`]. Without side information, [`enumerate_all`]
//! searches the admissible orderings and returns every valid model.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{CausalOrdering, Dag, NodeSet, ReachMatrix};
use crate::mlcm::{self, is_mlcm, is_rmwm_mlcm, StdMlcMatrix};
use crate::taildep::{
    check_chi_clique, clique_initial_filter, first_pattern_mismatch, maximum_chi_cliques,
    tdm_from_std_mlcm, TailDepMatrix,
};
use crate::tol::Tolerance;

/// Default limit on the dimension accepted by [`enumerate_all`].
pub const DEFAULT_MAX_D: usize = 10;

/// A standardized coefficient matrix recovered from `χ`, with its minimum
/// ML DAG and the ordering that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifiedModel {
    pub std_mlcm: StdMlcMatrix,
    pub min_ml_dag: Dag,
    pub initial_nodes: NodeSet,
    pub ordering_used: CausalOrdering,
    pub max_weighted: bool,
}

fn check_dim(chi: &TailDepMatrix, d: usize) -> Result<()> {
    if chi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: chi.dim(),
            found: d,
        });
    }
    Ok(())
}

fn check_pattern(chi: &TailDepMatrix, reach: &ReachMatrix) -> Result<()> {
    match first_pattern_mismatch(chi, reach)? {
        Some((row, col)) => Err(Error::PatternMismatch { row, col }),
        None => Ok(()),
    }
}

/// Snaps values within `eps` of zero to zero and rejects anything below.
fn settle(v: f64, row: usize, col: usize, tol: Tolerance) -> Result<f64> {
    if v < -tol.eps {
        Err(Error::NegativeEntry { row, col, value: v })
    } else if v <= tol.eps {
        Ok(0.0)
    } else {
        Ok(v)
    }
}

/// Recovers `B̄` from `χ` and the reachability matrix of the generating DAG.
///
/// Rows are filled in order of increasing ancestor count.
pub fn recover_from_reachability(
    chi: &TailDepMatrix,
    reach: &ReachMatrix,
    tol: Tolerance,
) -> Result<StdMlcMatrix> {
    check_dim(chi, reach.dim())?;
    check_pattern(chi, reach)?;
    let d = chi.dim();
    let mut rows: Vec<usize> = (0..d).collect();
    rows.sort_by_key(|&j| (reach.col(j).count_ones(..), j));
    let mut b = Array2::<f64>::zeros((d, d));
    for &j in &rows {
        let an: Vec<usize> = reach.col(j).ones().filter(|&k| k != j).collect();
        for i in reach.row(j).ones() {
            let s: f64 = an.iter().map(|&k| b[(k, i)].min(b[(k, j)])).sum();
            b[(j, i)] = settle(chi.get(j, i) - s, j, i, tol)?;
        }
        if b[(j, j)] <= 0.0 {
            return Err(Error::NonPositiveDiagonal {
                node: j,
                value: b[(j, j)],
            });
        }
    }
    Ok(StdMlcMatrix::from_array_unchecked(b))
}

/// Max-weighted variant: `b̄_jj = 1 - Σ_{k ∈ an(j)} b̄_kj` and
/// `b̄_ji = b̄_jj χ(j, i)` for `i ∈ de(j)`.
pub fn recover_from_reachability_rmwm(
    chi: &TailDepMatrix,
    reach: &ReachMatrix,
    tol: Tolerance,
) -> Result<StdMlcMatrix> {
    check_dim(chi, reach.dim())?;
    check_pattern(chi, reach)?;
    let d = chi.dim();
    let mut rows: Vec<usize> = (0..d).collect();
    rows.sort_by_key(|&j| (reach.col(j).count_ones(..), j));
    let mut b = Array2::<f64>::zeros((d, d));
    for &j in &rows {
        let s: f64 = reach
            .col(j)
            .ones()
            .filter(|&k| k != j)
            .map(|k| b[(k, j)])
            .sum();
        let bjj = 1.0 - s;
        if bjj <= tol.eps {
            return Err(Error::NonPositiveDiagonal {
                node: j,
                value: bjj,
            });
        }
        b[(j, j)] = bjj;
        for i in reach.row(j).ones().filter(|&i| i != j) {
            b[(j, i)] = bjj * chi.get(j, i);
        }
    }
    Ok(StdMlcMatrix::from_array_unchecked(b))
}

/// Row recursion evaluated one node at a time along an ordering prefix.
struct RowRecursion<'a> {
    chi: &'a TailDepMatrix,
    tol: Tolerance,
    b: Array2<f64>,
    placed: Vec<usize>,
    is_placed: Vec<bool>,
}

impl<'a> RowRecursion<'a> {
    fn new(chi: &'a TailDepMatrix, tol: Tolerance) -> Self {
        let d = chi.dim();
        Self {
            chi,
            tol,
            b: Array2::zeros((d, d)),
            placed: Vec::with_capacity(d),
            is_placed: vec![false; d],
        }
    }

    /// Appends `j` and fills row `j` for every node not yet placed. On
    /// failure the state is left unchanged.
    fn push(&mut self, j: usize, prune_dominance: bool) -> Result<()> {
        let d = self.chi.dim();
        self.is_placed[j] = true;
        let mut bjj = 0.0;
        for i in std::iter::once(j).chain((0..d).filter(|&i| !self.is_placed[i])) {
            let s: f64 = self
                .placed
                .iter()
                .map(|&k| self.b[(k, i)].min(self.b[(k, j)]))
                .sum();
            let v = match settle(self.chi.get(j, i) - s, j, i, self.tol) {
                Ok(v) => v,
                Err(e) => {
                    self.clear_row(j);
                    return Err(e);
                }
            };
            if i == j {
                if v <= 0.0 {
                    self.clear_row(j);
                    return Err(Error::NonPositiveDiagonal { node: j, value: v });
                }
                bjj = v;
            } else if prune_dominance && self.tol.gt(v, bjj) {
                self.clear_row(j);
                return Err(Error::Precondition(format!(
                    "b({j}, {i}) = {v} exceeds the diagonal {bjj}"
                )));
            }
            self.b[(j, i)] = v;
        }
        self.placed.push(j);
        Ok(())
    }

    fn clear_row(&mut self, j: usize) {
        self.b.row_mut(j).fill(0.0);
        self.is_placed[j] = false;
    }

    fn pop(&mut self) {
        if let Some(j) = self.placed.pop() {
            self.clear_row(j);
        }
    }
}

/// Recovers `B̄` from `χ` and an ordering `σ`; exact when `σ` is a causal
/// ordering of the generating DAG.
pub fn recover_from_ordering(
    chi: &TailDepMatrix,
    sigma: &CausalOrdering,
    tol: Tolerance,
) -> Result<StdMlcMatrix> {
    check_dim(chi, sigma.len())?;
    let mut rec = RowRecursion::new(chi, tol);
    for &j in sigma.order() {
        rec.push(j, false)?;
    }
    Ok(StdMlcMatrix::from_array_unchecked(rec.b))
}

/// Number of nodes of `v0` with positive tail dependence to `j`.
fn initial_count(chi: &TailDepMatrix, v0: &NodeSet, j: usize) -> usize {
    v0.iter().filter(|&&k| chi.is_positive(k, j)).count()
}

/// Orders the nodes by the number of initial nodes they depend on, then by
/// decreasing strongest dependence on an initial node, then by index.
/// Initial nodes come first.
pub fn ordering_from_initials(chi: &TailDepMatrix, v0: &NodeSet) -> Result<CausalOrdering> {
    check_chi_clique(chi, v0)?;
    let d = chi.dim();
    let mut keyed = Vec::with_capacity(d);
    for j in 0..d {
        let count = initial_count(chi, v0, j);
        if count == 0 {
            return Err(Error::NoInitialAncestor { node: j });
        }
        let strongest = v0.iter().map(|&l| chi.get(l, j)).fold(0.0, f64::max);
        keyed.push((count, !v0.contains(&j), strongest, j));
    }
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(b.2.total_cmp(&a.2))
            .then(a.3.cmp(&b.3))
    });
    CausalOrdering::from_order(keyed.into_iter().map(|k| k.3).collect())
}

/// Recovers the coefficient matrix of a max-weighted model from `χ` and its
/// initial nodes.
pub fn recover_rmwm_from_initials(
    chi: &TailDepMatrix,
    v0: &NodeSet,
    tol: Tolerance,
) -> Result<StdMlcMatrix> {
    let sigma = ordering_from_initials(chi, v0)?;
    recover_from_ordering(chi, &sigma, tol)
}

/// Ancestor relation of a max-weighted model read off `χ` and its initial
/// nodes: `k ∈ An(i)` iff `χ(k, i) > 0` and `χ(j, i) = χ(j, k) χ(k, i)` for
/// every initial `j` that depends on both.
pub fn reachability_from_initials(
    chi: &TailDepMatrix,
    v0: &NodeSet,
    tol: Tolerance,
) -> Result<ReachMatrix> {
    check_chi_clique(chi, v0)?;
    let d = chi.dim();
    let rows: Vec<Vec<bool>> = (0..d)
        .map(|k| {
            (0..d)
                .map(|i| {
                    i == k
                        || (chi.is_positive(k, i)
                            && v0
                                .iter()
                                .filter(|&&j| chi.is_positive(j, i) && chi.is_positive(j, k))
                                .all(|&j| tol.eq(chi.get(j, i), chi.get(j, k) * chi.get(k, i))))
                })
                .collect()
        })
        .collect();
    ReachMatrix::from_bool_rows(&rows)
}

/// Options for [`enumerate_all`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub tol: Tolerance,
    /// Larger inputs are refused with [`Error::TooLarge`].
    pub max_d: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            max_d: DEFAULT_MAX_D,
        }
    }
}

fn same_model(a: &StdMlcMatrix, b: &StdMlcMatrix, tol: Tolerance) -> bool {
    a.as_array()
        .iter()
        .zip(b.as_array().iter())
        .all(|(&x, &y)| (x > 0.0) == (y > 0.0) && tol.eq(x, y))
}

fn reproduces(chi: &TailDepMatrix, b: &StdMlcMatrix, tol: Tolerance) -> bool {
    let back = tdm_from_std_mlcm(b);
    chi.as_array()
        .iter()
        .zip(back.as_array().iter())
        .all(|(&x, &y)| tol.eq(x, y))
}

fn identified(
    b: StdMlcMatrix,
    reach: &ReachMatrix,
    initial_nodes: NodeSet,
    ordering: CausalOrdering,
    tol: Tolerance,
) -> Result<IdentifiedModel> {
    let min_ml_dag = mlcm::minimum_dag_of(b.as_array(), reach, tol);
    let max_weighted = is_rmwm_mlcm(&b, tol)?.valid;
    Ok(IdentifiedModel {
        std_mlcm: b,
        min_ml_dag,
        initial_nodes,
        ordering_used: ordering,
        max_weighted,
    })
}

fn canonical_sort(models: &mut [IdentifiedModel]) {
    models.sort_by(|a, b| {
        a.initial_nodes
            .cmp(&b.initial_nodes)
            .then_with(|| a.min_ml_dag.edges().cmp(b.min_ml_dag.edges()))
            .then_with(|| {
                a.std_mlcm
                    .as_array()
                    .iter()
                    .zip(b.std_mlcm.as_array().iter())
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
}

/// Every standardized coefficient matrix of a recursive max-linear model
/// whose tail dependence matrix is `χ`.
///
/// For each maximum clique of the `χ = 0` graph that passes
/// [`clique_initial_filter`], orderings are searched depth-first: clique
/// nodes first, the remaining nodes grouped by how many clique nodes they
/// depend on. The row recursion runs incrementally along the prefix, so a
/// negative entry prunes the whole subtree. Complete orderings that are
/// causal orderings of an already accepted model are skipped. An empty
/// result means `χ` is not the tail dependence matrix of any such model.
///
/// Entries that sit exactly on a feasibility boundary are classified with
/// the tolerance in `opts`; changing it can change the result.
pub fn enumerate_all(chi: &TailDepMatrix, opts: EnumerateOptions) -> Result<Vec<IdentifiedModel>> {
    let d = chi.dim();
    if d > opts.max_d {
        return Err(Error::TooLarge {
            d,
            max_d: opts.max_d,
        });
    }
    let tol = opts.tol;
    let mut found: Vec<(IdentifiedModel, ReachMatrix)> = Vec::new();
    for w in maximum_chi_cliques(chi) {
        if !clique_initial_filter(chi, &w, tol)? {
            continue;
        }
        let mut rec = RowRecursion::new(chi, tol);
        if w.iter().any(|&j| rec.push(j, true).is_err()) {
            continue;
        }
        let mut layers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for j in (0..d).filter(|j| !w.contains(j)) {
            layers.entry(initial_count(chi, &w, j)).or_default().push(j);
        }
        let layers: Vec<Vec<usize>> = layers.into_values().collect();
        let mut search = Dfs {
            chi,
            tol,
            w: &w,
            layers: &layers,
            found: &mut found,
        };
        search.run(
            &mut rec,
            0,
            &mut layers.first().cloned().unwrap_or_default(),
        )?;
    }
    let mut models: Vec<IdentifiedModel> = found.into_iter().map(|(m, _)| m).collect();
    canonical_sort(&mut models);
    Ok(models)
}

struct Dfs<'a, 'b> {
    chi: &'a TailDepMatrix,
    tol: Tolerance,
    w: &'a NodeSet,
    layers: &'a [Vec<usize>],
    found: &'b mut Vec<(IdentifiedModel, ReachMatrix)>,
}

impl Dfs<'_, '_> {
    /// `remaining` holds the unplaced nodes of layer `layer`.
    fn run(
        &mut self,
        rec: &mut RowRecursion<'_>,
        layer: usize,
        remaining: &mut Vec<usize>,
    ) -> Result<()> {
        if remaining.is_empty() {
            if layer + 1 < self.layers.len() {
                let mut next = self.layers[layer + 1].clone();
                return self.run(rec, layer + 1, &mut next);
            }
            return self.leaf(rec);
        }
        for pos in 0..remaining.len() {
            let j = remaining.remove(pos);
            if rec.push(j, true).is_ok() {
                self.run(rec, layer, remaining)?;
                rec.pop();
            }
            remaining.insert(pos, j);
        }
        Ok(())
    }

    fn leaf(&mut self, rec: &RowRecursion<'_>) -> Result<()> {
        let sigma = CausalOrdering::from_order(rec.placed.clone())?;
        for (_, reach) in self.found.iter() {
            let dag = Dag::from_reachability(reach);
            if dag.validate_causal_ordering(&sigma)? {
                return Ok(());
            }
        }
        let b = StdMlcMatrix::from_array_unchecked(rec.b.clone());
        if !is_mlcm(&b, self.tol).valid || !reproduces(self.chi, &b, self.tol) {
            return Ok(());
        }
        if self
            .found
            .iter()
            .any(|(m, _)| same_model(&m.std_mlcm, &b, self.tol))
        {
            return Ok(());
        }
        let reach = b.reachability()?;
        let model = identified(b, &reach, self.w.clone(), sigma, self.tol)?;
        self.found.push((model, reach));
        Ok(())
    }
}

/// Every standardized coefficient matrix of a recursive max-weighted model
/// whose tail dependence matrix is `χ`: one candidate per maximum clique.
pub fn enumerate_all_rmwm(chi: &TailDepMatrix, tol: Tolerance) -> Result<Vec<IdentifiedModel>> {
    let mut models: Vec<IdentifiedModel> = Vec::new();
    for w in maximum_chi_cliques(chi) {
        if !clique_initial_filter(chi, &w, tol)? {
            continue;
        }
        let sigma = ordering_from_initials(chi, &w)?;
        let Ok(b) = recover_from_ordering(chi, &sigma, tol) else {
            continue;
        };
        let Ok(reach) = b.reachability() else {
            continue;
        };
        if !is_rmwm_mlcm(&b, tol)?.valid || !reproduces(chi, &b, tol) {
            continue;
        }
        if models.iter().any(|m| same_model(&m.std_mlcm, &b, tol)) {
            continue;
        }
        models.push(identified(b, &reach, w, sigma, tol)?);
    }
    canonical_sort(&mut models);
    Ok(models)
}

/// The bijection `φ` between the initial node sets of two models sharing
/// `χ`: `φ(j)` is the only node of the second set tail dependent on `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialBijection {
    pub map: BTreeMap<usize, usize>,
}

impl InitialBijection {
    pub fn get(&self, j: usize) -> Option<usize> {
        self.map.get(&j).copied()
    }
}

pub fn initial_bijection(
    chi: &TailDepMatrix,
    v0: &NodeSet,
    w0: &NodeSet,
) -> Result<InitialBijection> {
    check_chi_clique(chi, v0)?;
    check_chi_clique(chi, w0)?;
    if v0.len() != w0.len() {
        return Err(Error::NoBijection(format!(
            "sets have {} and {} elements",
            v0.len(),
            w0.len()
        )));
    }
    let mut map = BTreeMap::new();
    let mut used = NodeSet::new();
    for &j in v0 {
        let hits: Vec<usize> = w0
            .iter()
            .copied()
            .filter(|&i| chi.is_positive(j, i))
            .collect();
        let [i] = hits[..] else {
            return Err(Error::NoBijection(format!(
                "node {j} depends on {} nodes of the second set",
                hits.len()
            )));
        };
        if !used.insert(i) {
            return Err(Error::NoBijection(format!("node {i} is hit twice")));
        }
        map.insert(j, i);
    }
    Ok(InitialBijection { map })
}

/// A necessary condition for two max-weighted models to share `χ` that
/// does not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceViolation {
    /// The initial node sets admit no bijection.
    NoBijection(String),
    /// `initial` moved to `image`, which is not a terminal node of the first
    /// DAG.
    NotTerminal { initial: usize, image: usize },
    /// The edge `from -> to` lies on a path from a moved initial node to its
    /// image in the first transitive reduction, but `to -> from` is missing
    /// from the second.
    EdgeNotReversed { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub bijection: Option<InitialBijection>,
    pub violations: Vec<EquivalenceViolation>,
}

impl EquivalenceReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the structural constraints linking two max-weighted models with
/// the same `χ`: each initial node `j` of `first` that is not initial in
/// `second` maps to a terminal node `φ(j)` of `first`, and every
/// transitive-reduction path from `j` to `φ(j)` in `first` is reversed in
/// the transitive reduction of `second`.
pub fn rmwm_equivalence_constraints(
    chi: &TailDepMatrix,
    first: &Dag,
    second: &Dag,
) -> Result<EquivalenceReport> {
    let d = chi.dim();
    for g in [first, second] {
        if g.node_count() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.node_count(),
            });
        }
    }
    let phi = match initial_bijection(chi, &first.initial_nodes(), &second.initial_nodes()) {
        Ok(p) => p,
        Err(e) => {
            return Ok(EquivalenceReport {
                bijection: None,
                violations: vec![EquivalenceViolation::NoBijection(e.to_string())],
            })
        }
    };
    let terminal = first.terminal_nodes();
    let tr1 = first.transitive_reduction();
    let tr2 = second.transitive_reduction();
    let mut violations = Vec::new();
    for (&j, &img) in &phi.map {
        if j == img {
            continue;
        }
        if !terminal.contains(&img) {
            violations.push(EquivalenceViolation::NotTerminal {
                initial: j,
                image: img,
            });
        }
        for (a, b) in tr1.edges() {
            let on_path = tr1.reach().get(j, a) && tr1.reach().get(b, img);
            if on_path && !tr2.has_edge(b, a) {
                let v = EquivalenceViolation::EdgeNotReversed { from: a, to: b };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
        }
    }
    Ok(EquivalenceReport {
        bijection: Some(phi),
        violations,
    })
}
