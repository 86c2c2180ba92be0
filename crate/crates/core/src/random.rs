// SPDX-License-Identifier: Apache-2.0
//! Seeded random DAGs and weighted models.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::mlcm::{homogeneous_model, potential_model, WeightedModel};

/// Weight structure of a generated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Random DAG, independent log-uniform weights.
    Random,
    /// Random polytree (forest), independent log-uniform weights.
    Polytree,
    /// Random DAG with the homogeneous weights.
    Homogeneous,
    /// Random DAG with weights `c_ki = r_k / r_i`, so every path is
    /// max-weighted.
    MaxWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub d: usize,
    /// Probability of each admissible edge.
    pub density: f64,
    /// Bounds of the log-uniform weight distribution.
    pub weight_range: (f64, f64),
    pub alpha: f64,
    pub kind: ModelKind,
}

impl GenConfig {
    pub fn new(d: usize, kind: ModelKind) -> Self {
        Self {
            d,
            density: 0.5,
            weight_range: (0.1, 10.0),
            alpha: 1.0,
            kind,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::EmptyGraph);
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::InvalidArgument(format!(
                "density {} is not in [0, 1]",
                self.density
            )));
        }
        let (lo, hi) = self.weight_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "weight range [{lo}, {hi}] must satisfy 0 < min <= max"
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        Ok(())
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Includes each pair `(π(a), π(b))`, `a < b`, with probability `density`
/// for a uniformly random permutation `π`.
pub fn random_dag<R: Rng + ?Sized>(d: usize, density: f64, rng: &mut R) -> Result<Dag> {
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if rng.random_bool(density) {
                edges.push((perm[a], perm[b]));
            }
        }
    }
    Dag::new(d, edges)
}

/// Random recursive tree with each edge kept with probability `density`
/// and oriented at random; the result has no undirected cycle.
pub fn random_polytree<R: Rng + ?Sized>(d: usize, density: f64, rng: &mut R) -> Result<Dag> {
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for a in 1..d {
        let b = rng.random_range(0..a);
        if rng.random_bool(density) {
            if rng.random_bool(0.5) {
                edges.push((perm[a], perm[b]));
            } else {
                edges.push((perm[b], perm[a]));
            }
        }
    }
    Dag::new(d, edges)
}

/// Draws a model; the same `(config, seed)` always gives the same model.
pub fn generate(config: &GenConfig, seed: u64) -> Result<WeightedModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(config, &mut rng)
}

pub fn generate_with<R: Rng + ?Sized>(config: &GenConfig, rng: &mut R) -> Result<WeightedModel> {
    config.validate()?;
    let d = config.d;
    let dag = match config.kind {
        ModelKind::Polytree => random_polytree(d, config.density, rng)?,
        _ => random_dag(d, config.density, rng)?,
    };
    match config.kind {
        ModelKind::Homogeneous => homogeneous_model(&dag, config.alpha),
        ModelKind::MaxWeighted => {
            let r: Vec<f64> = (0..d)
                .map(|_| log_uniform(rng, config.weight_range))
                .collect();
            let noise = (0..d)
                .map(|_| log_uniform(rng, config.weight_range))
                .collect();
            potential_model(&dag, &r, noise, config.alpha)
        }
        ModelKind::Random | ModelKind::Polytree => {
            let edges: Vec<_> = dag
                .edges()
                .collect::<Vec<_>>()
                .into_iter()
                .map(|(k, i)| (k, i, log_uniform(rng, config.weight_range)))
                .collect();
            let noise = (0..d)
                .map(|_| log_uniform(rng, config.weight_range))
                .collect();
            WeightedModel::new(dag, edges, noise, config.alpha)
        }
    }
}
