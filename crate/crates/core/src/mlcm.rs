// SPDX-License-Identifier: Apache-2.0
//! Max-linear coefficient matrices.
//!
//! A [`WeightedModel`] assigns positive weights `c_ki` to the edges of a DAG
//! and positive noise scales `c_ii` to its nodes. Its coefficient matrix `B`
//! holds in entry `(j, i)` the largest weight of a path from `j` to `i`,
//! computed in the max-times semiring. Standardizing `B` column-wise with the
//! tail index gives the [`StdMlcMatrix`] `B̄` from which tail dependence is
//! read off.

use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{square_dim, Dag, ReachMatrix};
use crate::tol::Tolerance;

/// Column sums of a standardized matrix must equal one within this bound.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

fn check_weight(what: impl FnOnce() -> String, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight {
            what: what(),
            value,
        })
    }
}

/// A recursive max-linear model: DAG, edge weights, noise scales and tail
/// index.
#[derive(Clone, PartialEq)]
pub struct WeightedModel {
    dag: Dag,
    /// `c[(k, i)]` for edges, `c[(i, i)]` for noise scales, zero elsewhere.
    c: Array2<f64>,
    alpha: f64,
}

impl WeightedModel {
    /// `edge_weights` must contain exactly one `(k, i, c_ki)` per edge of
    /// `dag`.
    pub fn new<I>(dag: Dag, edge_weights: I, noise_scales: Vec<f64>, alpha: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        check_alpha(alpha)?;
        let d = dag.node_count();
        if noise_scales.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: noise_scales.len(),
            });
        }
        let mut c = Array2::zeros((d, d));
        for (i, &s) in noise_scales.iter().enumerate() {
            check_weight(|| format!("noise scale of node {i}"), s)?;
            c[(i, i)] = s;
        }
        let mut seen = 0;
        for (k, i, w) in edge_weights {
            if !dag.has_edge(k, i) {
                return Err(Error::InvalidArgument(format!(
                    "weight given for {k} -> {i}, which is not an edge"
                )));
            }
            if c[(k, i)] != 0.0 {
                return Err(Error::DuplicateEdge(k, i));
            }
            check_weight(|| format!("edge {k} -> {i}"), w)?;
            c[(k, i)] = w;
            seen += 1;
        }
        if seen != dag.edge_count() {
            let (k, i) = dag
                .edges()
                .find(|&(k, i)| c[(k, i)] == 0.0)
                .expect("some edge lacks a weight");
            return Err(Error::InvalidArgument(format!(
                "edge {k} -> {i} has no weight"
            )));
        }
        Ok(Self { dag, c, alpha })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn node_count(&self) -> usize {
        self.dag.node_count()
    }

    pub fn noise_scale(&self, i: usize) -> f64 {
        self.c[(i, i)]
    }

    pub fn noise_scales(&self) -> Vec<f64> {
        self.c.diag().to_vec()
    }

    pub fn edge_weight(&self, k: usize, i: usize) -> Option<f64> {
        self.dag.has_edge(k, i).then(|| self.c[(k, i)])
    }

    /// `(k, i, c_ki)` for every edge, in lexicographic edge order.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.dag.edges().map(|(k, i)| (k, i, self.c[(k, i)]))
    }

    /// The same weights under another tail index.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }

    pub fn mlcm(&self) -> MlcMatrix {
        mlcm_from_weights(self)
    }

    pub fn std_mlcm(&self) -> StdMlcMatrix {
        standardize(&self.mlcm(), self.alpha).expect("model coefficients are valid")
    }
}

impl fmt::Debug for WeightedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedModel")
            .field("alpha", &self.alpha)
            .field("edges", &self.weighted_edges().collect::<Vec<_>>())
            .field("noise_scales", &self.noise_scales())
            .finish()
    }
}

fn validate_coefficients(b: &Array2<f64>) -> Result<usize> {
    let d = square_dim(b)?;
    for ((r, c), &v) in b.indexed_iter() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidEntry {
                row: r,
                col: c,
                value: v,
                reason: "coefficients must be finite and nonnegative",
            });
        }
    }
    for i in 0..d {
        if b[(i, i)] <= 0.0 {
            return Err(Error::NonPositiveDiagonal {
                node: i,
                value: b[(i, i)],
            });
        }
    }
    Ok(d)
}

/// Max-linear coefficient matrix `B`; entry `(j, i)` is the coefficient of
/// the noise variable `Z_j` in `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcMatrix(Array2<f64>);

impl MlcMatrix {
    /// Checks shape, finiteness, nonnegativity and a positive diagonal.
    pub fn new(b: Array2<f64>) -> Result<Self> {
        validate_coefficients(&b)?;
        Ok(Self(b))
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn reachability(&self) -> Result<ReachMatrix> {
        ReachMatrix::from_sign_pattern(&self.0)
    }
}

/// Standardized coefficient matrix `B̄`: nonnegative, positive diagonal,
/// every column summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StdMlcMatrix(Array2<f64>);

impl StdMlcMatrix {
    pub fn new(b: Array2<f64>) -> Result<Self> {
        let d = validate_coefficients(&b)?;
        for i in 0..d {
            let s: f64 = b.column(i).sum();
            if (s - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidEntry {
                    row: i,
                    col: i,
                    value: s,
                    reason: "column does not sum to one",
                });
            }
        }
        Ok(Self(b))
    }

    /// For matrices whose column sums hold by construction.
    pub(crate) fn from_array_unchecked(b: Array2<f64>) -> Self {
        Self(b)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.0[(j, i)]
    }

    pub fn reachability(&self) -> Result<ReachMatrix> {
        ReachMatrix::from_sign_pattern(&self.0)
    }

    /// Largest entrywise difference to another matrix of the same size.
    pub fn max_abs_diff(&self, other: &StdMlcMatrix) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }
}

pub(crate) fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "matrix shapes differ");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Max-times path analysis: `b_jj = c_jj` and
/// `b_ji = max_{k ∈ pa(i)} b_jk c_ki`, evaluated in topological order.
pub fn mlcm_from_weights(model: &WeightedModel) -> MlcMatrix {
    MlcMatrix(propagate(&model.dag, &model.c))
}

fn propagate(dag: &Dag, c: &Array2<f64>) -> Array2<f64> {
    let d = dag.node_count();
    let mut b = Array2::zeros((d, d));
    for &i in dag.topological_order() {
        b[(i, i)] = c[(i, i)];
        for &k in dag.parents(i) {
            let cki = c[(k, i)];
            for j in dag.reach().col(k).ones() {
                let v = b[(j, k)] * cki;
                if v > b[(j, i)] {
                    b[(j, i)] = v;
                }
            }
        }
    }
    b
}

/// `b̄_ij = b_ij^α / Σ_k b_kj^α`.
pub fn standardize(b: &MlcMatrix, alpha: f64) -> Result<StdMlcMatrix> {
    check_alpha(alpha)?;
    let mut out = b.0.mapv(|v| if v == 0.0 { 0.0 } else { v.powf(alpha) });
    for mut col in out.columns_mut() {
        let s: f64 = col.sum();
        col.mapv_inplace(|v| v / s);
    }
    Ok(StdMlcMatrix(out))
}

/// `b̃_ij = β_j b̄_ij^{1/α̃}`; the inverse of [`standardize`] up to column
/// scaling.
pub fn destandardize(b: &StdMlcMatrix, betas: &[f64], alpha_tilde: f64) -> Result<MlcMatrix> {
    check_alpha(alpha_tilde)?;
    let d = b.dim();
    if betas.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: betas.len(),
        });
    }
    for (j, &beta) in betas.iter().enumerate() {
        check_weight(|| format!("column scale {j}"), beta)?;
    }
    let inv = 1.0 / alpha_tilde;
    let out = Array2::from_shape_fn((d, d), |(r, c)| {
        let v = b.0[(r, c)];
        if v == 0.0 {
            0.0
        } else {
            betas[c] * v.powf(inv)
        }
    });
    Ok(MlcMatrix(out))
}

fn check_chained(reach: &ReachMatrix, j: usize, k: usize, i: usize) -> Result<()> {
    let d = reach.dim();
    for node in [j, k, i] {
        if node >= d {
            return Err(Error::NodeOutOfRange { node, d });
        }
    }
    if !reach.is_strict(j, k) || !reach.is_strict(k, i) {
        return Err(Error::Precondition(format!(
            "node {k} does not lie strictly between {j} and {i}"
        )));
    }
    Ok(())
}

/// `b̄_ji - b̄_jk b̄_ki / b̄_kk`, which is nonnegative for every valid matrix
/// and zero iff the best `j -> i` path may pass through `k`.
pub fn triple_gap(b: &StdMlcMatrix, j: usize, k: usize, i: usize) -> Result<f64> {
    let reach = b.reachability()?;
    check_chained(&reach, j, k, i)?;
    Ok(b.get(j, i) - b.get(j, k) * b.get(k, i) / b.get(k, k))
}

/// True iff `b̄_ji = b̄_jk b̄_ki / b̄_kk` within tolerance.
pub fn max_weighted_triple(
    b: &StdMlcMatrix,
    j: usize,
    k: usize,
    i: usize,
    tol: Tolerance,
) -> Result<bool> {
    let reach = b.reachability()?;
    check_chained(&reach, j, k, i)?;
    let prod = b.get(j, k) * b.get(k, i) / b.get(k, k);
    Ok(tol.eq(b.get(j, i), prod))
}

/// Why a matrix failed a validity check.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// The sign pattern is not the reachability matrix of a DAG.
    BadSignPattern(String),
    /// An identity required by the check fails at `(row, col)`.
    Mismatch {
        row: usize,
        col: usize,
        expected: f64,
        found: f64,
    },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::BadSignPattern(msg) => write!(f, "bad sign pattern: {msg}"),
            Rejection::Mismatch {
                row,
                col,
                expected,
                found,
            } => write!(
                f,
                "entry ({row}, {col}) is {found} but {expected} is required"
            ),
        }
    }
}

/// Verdict of [`is_mlcm`] or [`is_rmwm_mlcm`], with the largest scaled
/// residual seen over all compared entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcmCheck {
    pub valid: bool,
    pub worst_residual: f64,
    pub rejection: Option<Rejection>,
}

impl MlcmCheck {
    fn finish(worst: f64, first_bad: Option<Rejection>) -> Self {
        Self {
            valid: first_bad.is_none(),
            worst_residual: worst,
            rejection: first_bad,
        }
    }
}

/// Minimum ML DAG of a coefficient matrix: edge `k -> i` iff the direct
/// edge is the unique max-weighted path, i.e.
/// `b_ki > max_{ℓ ∈ de(k) ∩ an(i)} b_kℓ b_ℓi / b_ℓℓ`.
///
/// The criterion is invariant under standardization, so it applies to `B`
/// and `B̄` alike.
pub fn minimum_ml_dag(b: &StdMlcMatrix, tol: Tolerance) -> Result<Dag> {
    let reach = b.reachability()?;
    Ok(minimum_dag_of(&b.0, &reach, tol))
}

/// [`minimum_ml_dag`] evaluated on an unstandardized matrix.
pub fn minimum_ml_dag_unstandardized(b: &MlcMatrix, tol: Tolerance) -> Result<Dag> {
    let reach = b.reachability()?;
    Ok(minimum_dag_of(&b.0, &reach, tol))
}

pub(crate) fn minimum_dag_of(b: &Array2<f64>, reach: &ReachMatrix, tol: Tolerance) -> Dag {
    let d = reach.dim();
    let mut edges = Vec::new();
    for k in 0..d {
        for i in reach.row(k).ones() {
            if i == k {
                continue;
            }
            let best_via = reach
                .row(k)
                .intersection(reach.col(i))
                .filter(|&l| l != k && l != i)
                .map(|l| b[(k, l)] * b[(l, i)] / b[(l, l)])
                .fold(0.0, f64::max);
            if tol.gt(b[(k, i)], best_via) {
                edges.push((k, i));
            }
        }
    }
    Dag::new(d, edges).expect("edges follow a valid reachability relation")
}

/// Decides whether `B̄` is the standardized coefficient matrix of some
/// recursive max-linear model.
///
/// The sign pattern must be a reachability matrix; then the weights
/// `c_ki = b̄_ki / b̄_kk` on the minimum ML DAG and `c_ii = b̄_ii` are the only
/// candidates, and `B̄` is accepted iff path analysis with them reproduces
/// it.
pub fn is_mlcm(b: &StdMlcMatrix, tol: Tolerance) -> MlcmCheck {
    let reach = match b.reachability() {
        Ok(r) => r,
        Err(e) => {
            return MlcmCheck::finish(
                f64::INFINITY,
                Some(Rejection::BadSignPattern(e.to_string())),
            )
        }
    };
    let d = b.dim();
    let dag = minimum_dag_of(&b.0, &reach, tol);
    let mut c = Array2::zeros((d, d));
    for i in 0..d {
        c[(i, i)] = b.get(i, i);
    }
    for (k, i) in dag.edges() {
        c[(k, i)] = b.get(k, i) / b.get(k, k);
    }
    let rebuilt = propagate(&dag, &c);
    compare(&b.0, &rebuilt, tol)
}

fn compare(expected: &Array2<f64>, found: &Array2<f64>, tol: Tolerance) -> MlcmCheck {
    let mut worst = 0.0f64;
    let mut first_bad = None;
    for ((r, c), &e) in expected.indexed_iter() {
        let f = found[(r, c)];
        let res = tol.residual(e, f);
        worst = worst.max(res);
        if first_bad.is_none() && !tol.eq(e, f) {
            first_bad = Some(Rejection::Mismatch {
                row: r,
                col: c,
                expected: e,
                found: f,
            });
        }
    }
    MlcmCheck::finish(worst, first_bad)
}

/// Decides whether `B̄` is the standardized coefficient matrix of a
/// recursive max-weighted model: for every `i`, `j ∈ an(i)` and
/// `k ∈ de(j) ∩ pa(i)`, `b̄_ji = b̄_jk b̄_ki / b̄_kk`.
///
/// Parents are taken in the transitive reduction of the graph with
/// reachability `sgn(B̄)`. Fails if that sign pattern is not a
/// reachability matrix.
pub fn is_rmwm_mlcm(b: &StdMlcMatrix, tol: Tolerance) -> Result<MlcmCheck> {
    let reach = b.reachability()?;
    let tr = Dag::from_reachability(&reach);
    let d = b.dim();
    let mut worst = 0.0f64;
    let mut first_bad = None;
    for i in 0..d {
        for j in reach.col(i).ones().filter(|&j| j != i) {
            for &k in tr.parents(i) {
                if k == j || !reach.get(j, k) {
                    continue;
                }
                let prod = b.get(j, k) * b.get(k, i) / b.get(k, k);
                worst = worst.max(tol.residual(b.get(j, i), prod));
                if first_bad.is_none() && !tol.eq(b.get(j, i), prod) {
                    first_bad = Some(Rejection::Mismatch {
                        row: j,
                        col: i,
                        expected: prod,
                        found: b.get(j, i),
                    });
                }
            }
        }
    }
    Ok(MlcmCheck::finish(worst, first_bad))
}

/// The homogeneous model on `dag`: `c_ii = |An(i)|^{-1/α}` and
/// `c_ki = (|An(k)| / |An(i)|)^{1/α}`. Every path is max-weighted and
/// `b_ji = |An(i)|^{-1/α}` for `j ∈ An(i)`.
pub fn homogeneous_model(dag: &Dag, alpha: f64) -> Result<WeightedModel> {
    check_alpha(alpha)?;
    let d = dag.node_count();
    let n: Vec<f64> = (0..d).map(|i| dag.ancestor_count_incl(i) as f64).collect();
    let noise = n.iter().map(|&a| a.powf(-1.0 / alpha)).collect();
    let edges: Vec<_> = dag
        .edges()
        .map(|(k, i)| (k, i, (n[k] / n[i]).powf(1.0 / alpha)))
        .collect();
    WeightedModel::new(dag.clone(), edges, noise, alpha)
}

/// A max-weighted model from node potentials `r`: `c_ki = r_k / r_i`, so
/// every `j -> i` path has weight `c_jj r_j / r_i`.
pub fn potential_model(
    dag: &Dag,
    potentials: &[f64],
    noise_scales: Vec<f64>,
    alpha: f64,
) -> Result<WeightedModel> {
    let d = dag.node_count();
    if potentials.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: potentials.len(),
        });
    }
    for (i, &r) in potentials.iter().enumerate() {
        check_weight(|| format!("potential of node {i}"), r)?;
    }
    let edges: Vec<_> = dag
        .edges()
        .map(|(k, i)| (k, i, potentials[k] / potentials[i]))
        .collect();
    WeightedModel::new(dag.clone(), edges, noise_scales, alpha)
}
