// SPDX-License-Identifier: Apache-2.0
//! Tail dependence matrices and their structure.
//!
//! For a standardized coefficient matrix `B̄` the tail dependence
//! coefficient of `X_i` and `X_j` is
//! `χ(i, j) = Σ_{k ∈ An(i) ∩ An(j)} min(b̄_ki, b̄_kj)`. This module computes
//! it, finds the maximum cliques of the graph joining nodes with `χ = 0`,
//! and evaluates the coefficient recursions that express `B̄` and `χ`
//! through `χ` alone for max-weighted models.

use std::collections::BTreeMap;
use std::fmt;

use ndarray::Array2;

use crate::clique::BitGraph;
use crate::error::{Error, Result};
use crate::graph::{square_dim, Dag, NodeSet, ReachMatrix};
use crate::mlcm::StdMlcMatrix;
use crate::tol::{Tolerance, ZERO_TOL};

/// Symmetric matrix of tail dependence coefficients with unit diagonal and
/// entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailDepMatrix(Array2<f64>);

impl TailDepMatrix {
    /// Validates a candidate matrix.
    ///
    /// Symmetry and the unit diagonal are checked to `ZERO_TOL`, after which
    /// the matrix is symmetrized. Entries strictly between 0 and `ZERO_TOL`
    /// cannot be classified as zero or positive and are rejected.
    pub fn new(chi: Array2<f64>) -> Result<Self> {
        let d = square_dim(&chi)?;
        for ((r, c), &v) in chi.indexed_iter() {
            if !v.is_finite() || !(-ZERO_TOL..=1.0 + ZERO_TOL).contains(&v) {
                return Err(Error::InvalidEntry {
                    row: r,
                    col: c,
                    value: v,
                    reason: "tail dependence coefficients lie in [0, 1]",
                });
            }
            if v != 0.0 && v.abs() < ZERO_TOL {
                return Err(Error::IllConditionedZero {
                    row: r,
                    col: c,
                    value: v,
                });
            }
        }
        for i in 0..d {
            if (chi[(i, i)] - 1.0).abs() > ZERO_TOL {
                return Err(Error::InvalidEntry {
                    row: i,
                    col: i,
                    value: chi[(i, i)],
                    reason: "diagonal entries must be one",
                });
            }
            for j in i + 1..d {
                if (chi[(i, j)] - chi[(j, i)]).abs() > ZERO_TOL {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        upper: chi[(i, j)],
                        lower: chi[(j, i)],
                    });
                }
            }
        }
        Ok(Self::from_array_unchecked(chi))
    }

    /// Symmetrizes, clamps to `[0, 1]` and sets the diagonal to one.
    pub(crate) fn from_array_unchecked(mut chi: Array2<f64>) -> Self {
        let d = chi.nrows();
        for i in 0..d {
            chi[(i, i)] = 1.0;
            for j in i + 1..d {
                let v = (0.5 * (chi[(i, j)] + chi[(j, i)])).clamp(0.0, 1.0);
                chi[(i, j)] = v;
                chi[(j, i)] = v;
            }
        }
        Self(chi)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    #[inline]
    pub fn is_positive(&self, i: usize, j: usize) -> bool {
        self.0[(i, j)] > 0.0
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &TailDepMatrix) -> f64 {
        crate::mlcm::max_abs_diff(&self.0, &other.0)
    }
}

/// `χ(i, j) = Σ_k min(b̄_ki, b̄_kj)`, unit diagonal.
pub fn tdm_from_std_mlcm(b: &StdMlcMatrix) -> TailDepMatrix {
    let b = b.as_array();
    let d = b.nrows();
    let mut chi = Array2::eye(d);
    for i in 0..d {
        for j in i + 1..d {
            let s: f64 = (0..d).map(|k| b[(k, i)].min(b[(k, j)])).sum();
            chi[(i, j)] = s;
            chi[(j, i)] = s;
        }
    }
    TailDepMatrix::from_array_unchecked(chi)
}

/// True iff `χ(i, j) > 0` exactly when `i` and `j` have a common ancestor
/// (the sign pattern of `RᵀR`).
pub fn independence_pattern_check(chi: &TailDepMatrix, reach: &ReachMatrix) -> Result<bool> {
    Ok(first_pattern_mismatch(chi, reach)?.is_none())
}

pub(crate) fn first_pattern_mismatch(
    chi: &TailDepMatrix,
    reach: &ReachMatrix,
) -> Result<Option<(usize, usize)>> {
    let d = chi.dim();
    if reach.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: reach.dim(),
        });
    }
    for i in 0..d {
        for j in i..d {
            let common = reach.common_ancestor_count(i, j) > 0;
            if common != chi.is_positive(i, j) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Undirected graph on the nodes with an edge `{i, j}` iff `χ(i, j) = 0`.
#[derive(Debug, Clone)]
pub struct ChiComplementGraph(BitGraph);

impl ChiComplementGraph {
    pub fn new(chi: &TailDepMatrix) -> Self {
        let d = chi.dim();
        let mut g = BitGraph::new(d);
        for i in 0..d {
            for j in i + 1..d {
                if !chi.is_positive(i, j) {
                    g.add_edge(i, j);
                }
            }
        }
        Self(g)
    }

    pub fn node_count(&self) -> usize {
        self.0.node_count()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.0.has_edge(i, j)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.neighbors(i)
    }

    /// All maximum cliques, each ascending, in lexicographic order.
    pub fn maximum_cliques(&self) -> Vec<NodeSet> {
        self.0
            .maximum_cliques()
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect()
    }
}

/// Maximum cliques of the `χ = 0` graph: the candidate initial node sets.
pub fn maximum_chi_cliques(chi: &TailDepMatrix) -> Vec<NodeSet> {
    ChiComplementGraph::new(chi).maximum_cliques()
}

/// Checks that `w` is non-empty, in range, and pairwise tail independent.
pub fn check_chi_clique(chi: &TailDepMatrix, w: &NodeSet) -> Result<()> {
    let d = chi.dim();
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty node set".into()));
    }
    for &k in w {
        if k >= d {
            return Err(Error::NodeOutOfRange { node: k, d });
        }
    }
    for &a in w {
        for &b in w.range(a + 1..) {
            if chi.is_positive(a, b) {
                return Err(Error::NotAClique(a, b));
            }
        }
    }
    Ok(())
}

/// Necessary condition for `w` to be the set of initial nodes:
/// `χ(i, j) ≥ Σ_{k ∈ w} min(χ(k, i), χ(k, j))` for all `i, j ∉ w`.
pub fn clique_initial_filter(chi: &TailDepMatrix, w: &NodeSet, tol: Tolerance) -> Result<bool> {
    check_chi_clique(chi, w)?;
    let d = chi.dim();
    let rest: Vec<usize> = (0..d).filter(|k| !w.contains(k)).collect();
    for (a, &i) in rest.iter().enumerate() {
        for &j in &rest[a..] {
            let bound: f64 = w.iter().map(|&k| chi.get(k, i).min(chi.get(k, j))).sum();
            if !tol.ge(chi.get(i, j), bound) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_dims(dag: &Dag, chi: &TailDepMatrix) -> Result<()> {
    if dag.node_count() != chi.dim() {
        return Err(Error::DimensionMismatch {
            expected: dag.node_count(),
            found: chi.dim(),
        });
    }
    Ok(())
}

fn check_node(dag: &Dag, i: usize) -> Result<()> {
    if i >= dag.node_count() {
        return Err(Error::NodeOutOfRange {
            node: i,
            d: dag.node_count(),
        });
    }
    Ok(())
}

/// Solves `x_k = 1 - Σ_{ℓ ∈ de(k) ∩ S} x_ℓ` for all `k ∈ S`, processing
/// `S` from its sinks upwards.
fn descending_recursion(dag: &Dag, set: &NodeSet) -> BTreeMap<usize, f64> {
    let mut out = BTreeMap::new();
    for &k in dag.topological_order().iter().rev() {
        if !set.contains(&k) {
            continue;
        }
        let below: f64 = dag
            .reach()
            .row(k)
            .ones()
            .filter(|&l| l != k)
            .filter_map(|l| out.get(&l))
            .sum();
        out.insert(k, 1.0 - below);
    }
    out
}

/// Coefficients `λ_jk`, `k ∈ an(j)`, with which
/// `b̄_ji = χ(j, i) - Σ_{k ∈ an(j)} λ_jk χ(k, i)` in a max-weighted model.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCoefficients {
    pub node: usize,
    pub coefficients: BTreeMap<usize, f64>,
}

impl LambdaCoefficients {
    pub fn get(&self, k: usize) -> f64 {
        self.coefficients.get(&k).copied().unwrap_or(0.0)
    }
}

pub fn lambda_coefficients(dag: &Dag, j: usize) -> Result<LambdaCoefficients> {
    check_node(dag, j)?;
    Ok(LambdaCoefficients {
        node: j,
        coefficients: descending_recursion(dag, &dag.ancestors(j)),
    })
}

/// `b̄_ji` of the max-weighted model on `dag` with tail dependence matrix
/// `chi`, expressed through `chi` alone.
pub fn lambda_representation(dag: &Dag, chi: &TailDepMatrix, j: usize, i: usize) -> Result<f64> {
    check_dims(dag, chi)?;
    check_node(dag, i)?;
    check_node(dag, j)?;
    if !dag.reach().get(j, i) {
        return Err(Error::Precondition(format!(
            "{j} is not an ancestor of {i}"
        )));
    }
    let lambda = lambda_coefficients(dag, j)?;
    Ok(chi.get(j, i)
        - lambda
            .coefficients
            .iter()
            .map(|(&k, &l)| l * chi.get(k, i))
            .sum::<f64>())
}

/// Coefficients `μ_ij,k`, `k ∈ An(i) ∩ An(j)`, with which
/// `χ(i, j) = Σ_k μ_ij,k min(χ(k, i), χ(k, j))` in a max-weighted model.
#[derive(Debug, Clone, PartialEq)]
pub struct MuCoefficients {
    pub pair: (usize, usize),
    pub coefficients: BTreeMap<usize, f64>,
    /// Common ancestors of which no other common ancestor is a descendant.
    pub lowest_common_ancestors: NodeSet,
}

impl MuCoefficients {
    pub fn get(&self, k: usize) -> f64 {
        self.coefficients.get(&k).copied().unwrap_or(0.0)
    }
}

pub fn mu_coefficients(dag: &Dag, i: usize, j: usize) -> Result<MuCoefficients> {
    check_node(dag, i)?;
    check_node(dag, j)?;
    let reach = dag.reach();
    let common: NodeSet = reach.col(i).intersection(reach.col(j)).collect();
    let lca = common
        .iter()
        .copied()
        .filter(|&k| !common.iter().any(|&l| l != k && reach.get(k, l)))
        .collect();
    Ok(MuCoefficients {
        pair: (i, j),
        coefficients: descending_recursion(dag, &common),
        lowest_common_ancestors: lca,
    })
}

/// `Σ_k μ_ij,k min(χ(k, i), χ(k, j))`, which reproduces `χ(i, j)` for the
/// tail dependence matrix of a max-weighted model on `dag`.
pub fn mu_representation(dag: &Dag, chi: &TailDepMatrix, i: usize, j: usize) -> Result<f64> {
    check_dims(dag, chi)?;
    let mu = mu_coefficients(dag, i, j)?;
    Ok(mu
        .coefficients
        .iter()
        .map(|(&k, &m)| m * chi.get(k, i).min(chi.get(k, j)))
        .sum())
}

/// The first condition of the max-weighted characterization that fails.
#[derive(Debug, Clone, PartialEq)]
pub enum TdmFailure {
    /// `χ(i, j) > 0` does not match "common ancestor exists".
    SignPattern { i: usize, j: usize },
    /// The recursively computed `b̄_ii` is not positive.
    NonPositiveDiagonal { node: usize, value: f64 },
    /// `χ(j, i) ≠ χ(j, k) χ(k, i)` for `j ∈ an(i)`, `k ∈ de(j) ∩ pa(i)`.
    Multiplicativity {
        j: usize,
        k: usize,
        i: usize,
        lhs: f64,
        rhs: f64,
    },
    /// `χ(i, j) ≠ Σ_k b̄_kk min(χ(k, i), χ(k, j))` for incomparable `i, j`.
    CommonAncestorSum {
        i: usize,
        j: usize,
        lhs: f64,
        rhs: f64,
    },
}

impl fmt::Display for TdmFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TdmFailure::SignPattern { i, j } => write!(
                f,
                "sign of chi({i}, {j}) disagrees with the common-ancestor pattern"
            ),
            TdmFailure::NonPositiveDiagonal { node, value } => {
                write!(
                    f,
                    "diagonal coefficient of node {node} is {value}, not positive"
                )
            }
            TdmFailure::Multiplicativity { j, k, i, lhs, rhs } => write!(
                f,
                "chi({j}, {i}) = {lhs} but chi({j}, {k}) chi({k}, {i}) = {rhs}"
            ),
            TdmFailure::CommonAncestorSum { i, j, lhs, rhs } => write!(
                f,
                "chi({i}, {j}) = {lhs} but the common-ancestor sum is {rhs}"
            ),
        }
    }
}

/// Outcome of [`check_rmwm_tdm`].
#[derive(Debug, Clone, PartialEq)]
pub struct RmwmTdmReport {
    pub accepted: bool,
    /// `b̄_ii = 1 - Σ_{k ∈ an(i)} b̄_kk χ(k, i)`, indexed by node.
    pub diagonal: Vec<f64>,
    pub failure: Option<TdmFailure>,
    /// `b̄_ji = b̄_jj χ(j, i)` for `j ∈ an(i)`, present when accepted.
    pub std_mlcm: Option<StdMlcMatrix>,
}

/// Decides whether `chi` is the tail dependence matrix of a max-weighted
/// model on `dag`.
pub fn check_rmwm_tdm(dag: &Dag, chi: &TailDepMatrix, tol: Tolerance) -> Result<RmwmTdmReport> {
    check_dims(dag, chi)?;
    let d = dag.node_count();
    let reach = dag.reach();

    let mut diag = vec![0.0; d];
    for &i in dag.topological_order() {
        let s: f64 = reach
            .col(i)
            .ones()
            .filter(|&k| k != i)
            .map(|k| diag[k] * chi.get(k, i))
            .sum();
        diag[i] = 1.0 - s;
    }
    let reject = |failure| {
        Ok(RmwmTdmReport {
            accepted: false,
            diagonal: diag.clone(),
            failure: Some(failure),
            std_mlcm: None,
        })
    };

    if let Some((i, j)) = first_pattern_mismatch(chi, reach)? {
        return reject(TdmFailure::SignPattern { i, j });
    }
    for i in 0..d {
        for j in reach.col(i).ones().filter(|&j| j != i) {
            for &k in dag.parents(i) {
                if k == j || !reach.get(j, k) {
                    continue;
                }
                let lhs = chi.get(j, i);
                let rhs = chi.get(j, k) * chi.get(k, i);
                if !tol.eq(lhs, rhs) {
                    return reject(TdmFailure::Multiplicativity { j, k, i, lhs, rhs });
                }
            }
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            if reach.get(i, j) || reach.get(j, i) || reach.common_ancestor_count(i, j) == 0 {
                continue;
            }
            let lhs = chi.get(i, j);
            let rhs: f64 = reach
                .col(i)
                .intersection(reach.col(j))
                .map(|k| diag[k] * chi.get(k, i).min(chi.get(k, j)))
                .sum();
            if !tol.eq(lhs, rhs) {
                return reject(TdmFailure::CommonAncestorSum { i, j, lhs, rhs });
            }
        }
    }

    if let Some((node, &value)) = diag
        .iter()
        .enumerate()
        .find(|(_, &v)| v.is_nan() || v <= tol.eps)
    {
        return reject(TdmFailure::NonPositiveDiagonal { node, value });
    }

    let b = Array2::from_shape_fn((d, d), |(j, i)| {
        if j == i {
            diag[i]
        } else if reach.get(j, i) {
            diag[j] * chi.get(j, i)
        } else {
            0.0
        }
    });
    Ok(RmwmTdmReport {
        accepted: true,
        diagonal: diag,
        failure: None,
        std_mlcm: Some(StdMlcMatrix::from_array_unchecked(b)),
    })
}
