// SPDX-License-Identifier: Apache-2.0
//! Simulation with heavy-tailed noise and tail dependence estimation.
//!
//! Samples are drawn through the coefficient matrix,
//! `X_i = max_{j ∈ An(i)} b_ji Z_j`, with i.i.d. Pareto or Fréchet noise.
//! Rows are generated in fixed-size chunks; chunk `c` uses a ChaCha8
//! generator seeded with the block seed on stream `c`, so results do not
//! depend on the number of threads.

use fixedbitset::FixedBitSet;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Frechet, Pareto};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mlcm::WeightedModel;
use crate::taildep::TailDepMatrix;

/// Rows generated per random stream.
const CHUNK_ROWS: usize = 4096;

/// Smallest number of exceedances [`empirical_tdm`] accepts per margin.
pub const MIN_EXCEEDANCES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFamily {
    /// Survival function `x^{-α}` on `[1, ∞)`.
    Pareto,
    /// Distribution function `exp(-x^{-α})` on `(0, ∞)`.
    Frechet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    pub alpha: f64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { family, alpha })
    }

    fn sampler(&self) -> Noise {
        match self.family {
            NoiseFamily::Pareto => {
                Noise::Pareto(Pareto::new(1.0, self.alpha).expect("alpha checked"))
            }
            NoiseFamily::Frechet => {
                Noise::Frechet(Frechet::new(0.0, 1.0, self.alpha).expect("alpha checked"))
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Noise {
    Pareto(Pareto<f64>),
    Frechet(Frechet<f64>),
}

impl Noise {
    #[inline]
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Noise::Pareto(p) => p.sample(rng),
            Noise::Frechet(f) => f.sample(rng),
        }
    }
}

/// `n` independent draws of the model, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub data: Array2<f64>,
    pub seed: u64,
    pub noise: NoiseSpec,
}

impl SampleBlock {
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }
}

/// Nonzero coefficients per column: `(j, b_ji)` for `j ∈ An(i)`.
fn column_terms(model: &WeightedModel) -> Vec<Vec<(usize, f64)>> {
    let b = model.mlcm().into_array();
    (0..b.ncols())
        .map(|i| {
            (0..b.nrows())
                .filter(|&j| b[(j, i)] > 0.0)
                .map(|j| (j, b[(j, i)]))
                .collect()
        })
        .collect()
}

#[inline]
fn draw_row<R: Rng + ?Sized>(
    terms: &[Vec<(usize, f64)>],
    noise: &Noise,
    z: &mut [f64],
    row: &mut [f64],
    rng: &mut R,
) {
    for zj in z.iter_mut() {
        *zj = noise.draw(rng);
    }
    for (x, t) in row.iter_mut().zip(terms) {
        *x = t.iter().map(|&(j, b)| b * z[j]).fold(0.0, f64::max);
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Draws `n` rows; deterministic in `seed`.
pub fn sample(model: &WeightedModel, noise: NoiseSpec, n: usize, seed: u64) -> Result<SampleBlock> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let d = model.node_count();
    let terms = column_terms(model);
    let sampler = noise.sampler();
    let mut flat = vec![0.0; n * d];
    flat.par_chunks_mut(CHUNK_ROWS * d)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = chunk_rng(seed, c);
            let mut z = vec![0.0; d];
            for row in chunk.chunks_mut(d) {
                draw_row(&terms, &sampler, &mut z, row, &mut rng);
            }
        });
    let data = Array2::from_shape_vec((n, d), flat).expect("buffer has n * d entries");
    Ok(SampleBlock { data, seed, noise })
}

/// Exceedance indicators of one column above its empirical `u`-quantile.
fn exceedances(col: ndarray::ArrayView1<'_, f64>, k: usize) -> FixedBitSet {
    let n = col.len();
    let mut sorted: Vec<f64> = col.to_vec();
    let (_, &mut threshold, _) = sorted.select_nth_unstable_by(n - k - 1, f64::total_cmp);
    let mut bits = FixedBitSet::with_capacity(n);
    for (r, &v) in col.iter().enumerate() {
        if v > threshold {
            bits.insert(r);
        }
    }
    bits
}

/// Empirical tail dependence at level `u`:
/// `χ̂(i, j) = #{both exceed} / #{j exceeds}`, averaged with the roles of
/// `i` and `j` swapped. The threshold of each margin is its
/// `(n - k)`-th order statistic with `k = ⌊n (1 - u)⌋`.
///
/// The estimator is biased at finite `u`; the bias shrinks as `u → 1`.
pub fn empirical_tdm(block: &SampleBlock, u: f64) -> Result<TailDepMatrix> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {u} is not in (0, 1)"
        )));
    }
    let n = block.n();
    let d = block.d();
    let k = (n as f64 * (1.0 - u)).floor() as usize;
    if k < MIN_EXCEEDANCES || k >= n {
        return Err(Error::TooFewExceedances {
            found: k,
            required: MIN_EXCEEDANCES,
        });
    }
    let bits: Vec<FixedBitSet> = (0..d)
        .into_par_iter()
        .map(|i| exceedances(block.data.column(i), k))
        .collect();
    let counts: Vec<usize> = bits.iter().map(|b| b.count_ones(..)).collect();
    if let Some(&found) = counts.iter().find(|&&c| c < MIN_EXCEEDANCES) {
        return Err(Error::TooFewExceedances {
            found,
            required: MIN_EXCEEDANCES,
        });
    }
    let mut chi = Array2::eye(d);
    for i in 0..d {
        for j in i + 1..d {
            let joint = bits[i].intersection_count(&bits[j]) as f64;
            let v = 0.5 * (joint / counts[j] as f64 + joint / counts[i] as f64);
            chi[(i, j)] = v;
            chi[(j, i)] = v;
        }
    }
    Ok(TailDepMatrix::from_array_unchecked(chi))
}

/// The max-stable limit law of normalized maxima of the model, with
/// normalization `n^{1/α}`.
#[derive(Debug, Clone)]
pub struct LimitDistribution {
    b: Array2<f64>,
    alpha: f64,
}

impl LimitDistribution {
    pub fn new(model: &WeightedModel) -> Self {
        Self {
            b: model.mlcm().into_array(),
            alpha: model.alpha(),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    #[inline]
    fn term(&self, j: usize, i: usize, x: f64) -> f64 {
        let b = self.b[(j, i)];
        if b == 0.0 || x == f64::INFINITY {
            0.0
        } else {
            (b / x).powf(self.alpha)
        }
    }

    fn check_point(x: f64) -> Result<()> {
        if x > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "evaluation point {x} is not positive"
            )))
        }
    }

    /// `G(x) = exp(-Σ_j max_{i ∈ De(j)} (b_ji / x_i)^α)`; coordinates may be
    /// `+∞`.
    pub fn cdf(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.len(),
            });
        }
        for &v in x {
            Self::check_point(v)?;
        }
        let s: f64 = (0..d)
            .map(|j| (0..d).map(|i| self.term(j, i, x[i])).fold(0.0, f64::max))
            .sum();
        Ok((-s).exp())
    }

    /// `Σ_j b_ji^α`, the scale of the `i`-th margin.
    pub fn marginal_scale(&self, i: usize) -> f64 {
        self.b.column(i).iter().map(|&b| b.powf(self.alpha)).sum()
    }

    /// `G_i(x) = exp(-x^{-α} Σ_j b_ji^α)`.
    pub fn marginal_cdf(&self, i: usize, x: f64) -> Result<f64> {
        Self::check_point(x)?;
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        Ok((-x.powf(-self.alpha) * self.marginal_scale(i)).exp())
    }

    /// `G_ij(x_i, x_j) = exp(-Σ_k max((b_ki / x_i)^α, (b_kj / x_j)^α))`.
    pub fn bivariate_cdf(&self, i: usize, j: usize, xi: f64, xj: f64) -> Result<f64> {
        Self::check_point(xi)?;
        Self::check_point(xj)?;
        let s: f64 = (0..self.dim())
            .map(|k| self.term(k, i, xi).max(self.term(k, j, xj)))
            .sum();
        Ok((-s).exp())
    }

    /// The point at which `G_i` equals `e^{-1}`.
    pub fn standardization_point(&self, i: usize) -> f64 {
        self.marginal_scale(i).powf(1.0 / self.alpha)
    }

    /// `2 + log G_ij` at the standardization points, which is `χ(i, j)`.
    pub fn tail_dependence(&self, i: usize, j: usize) -> f64 {
        let g = self
            .bivariate_cdf(
                i,
                j,
                self.standardization_point(i),
                self.standardization_point(j),
            )
            .expect("standardization points are positive");
        2.0 + g.ln()
    }
}

/// `G(x)` of the limit law of `model`.
pub fn limit_cdf(model: &WeightedModel, x: &[f64]) -> Result<f64> {
    LimitDistribution::new(model).cdf(x)
}

/// `a_n = n^{1/α}`.
pub fn normalizing_constant(n: usize, alpha: f64) -> f64 {
    (n as f64).powf(1.0 / alpha)
}

/// Componentwise maxima of `n_blocks` blocks of `block_size` draws, each
/// divided by `block_size^{1/α}` (α of the noise).
pub fn block_maxima(
    model: &WeightedModel,
    noise: NoiseSpec,
    n_blocks: usize,
    block_size: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    if n_blocks == 0 || block_size == 0 {
        return Err(Error::InvalidArgument(
            "block count and size must be positive".into(),
        ));
    }
    const BLOCKS_PER_STREAM: usize = 16;
    let d = model.node_count();
    let terms = column_terms(model);
    let sampler = noise.sampler();
    let scale = 1.0 / normalizing_constant(block_size, noise.alpha);
    let mut flat = vec![0.0f64; n_blocks * d];
    flat.par_chunks_mut(BLOCKS_PER_STREAM * d)
        .enumerate()
        .for_each(|(c, chunk)| {
            let mut rng = chunk_rng(seed, c);
            let mut z = vec![0.0; d];
            let mut row = vec![0.0f64; d];
            for out in chunk.chunks_mut(d) {
                out.fill(0.0);
                for _ in 0..block_size {
                    draw_row(&terms, &sampler, &mut z, &mut row, &mut rng);
                    for (m, &x) in out.iter_mut().zip(&row) {
                        *m = m.max(x);
                    }
                }
                for m in out.iter_mut() {
                    *m *= scale;
                }
            }
        });
    Ok(Array2::from_shape_vec((n_blocks, d), flat).expect("buffer has n_blocks * d entries"))
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `sample` and `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(r, &x)| {
            let f = cdf(x);
            (f - r as f64 / n).max((r + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
