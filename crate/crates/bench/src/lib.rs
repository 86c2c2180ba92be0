// SPDX-License-Identifier: Apache-2.0
//! Inputs shared by the benchmarks.

use maxlin::random::generate;
use maxlin::{GenConfig, ModelKind, WeightedModel};

/// Model with `d` nodes, edge density 0.5 and weights in `[0.5, 2]`.
pub fn model(d: usize, kind: ModelKind, seed: u64) -> WeightedModel {
    let mut cfg = GenConfig::new(d, kind);
    cfg.weight_range = (0.5, 2.0);
    generate(&cfg, seed).expect("benchmark configuration is valid")
}
