// SPDX-License-Identifier: Apache-2.0
//! Recursive max-linear models on directed acyclic graphs.
//!
//! ```
//! use maxlin::identify::recover_from_ordering;
//! use maxlin::taildep::tdm_from_std_mlcm;
//! use maxlin::{CausalOrdering, Dag, Tolerance, WeightedModel};
//!
//! let dag = Dag::new(3, [(0, 1), (1, 2)])?;
//! let model = WeightedModel::new(dag, [(0, 1, 2.0), (1, 2, 0.5)], vec![1.0; 3], 1.0)?;
//! let chi = tdm_from_std_mlcm(&model.std_mlcm());
//! let b = recover_from_ordering(&chi, &CausalOrdering::identity(3), Tolerance::default())?;
//! assert!(b.max_abs_diff(&model.std_mlcm()) < 1e-12);
//! # Ok::<(), maxlin::Error>(())
//! ```

mod clique;
pub mod error;
pub mod graph;
pub mod identify;
pub mod mlcm;
pub mod random;
pub mod simulate;
pub mod taildep;
pub mod tol;

pub use error::{Error, Result};
pub use graph::{AncestralSets, CausalOrdering, Dag, NodeSet, ReachMatrix};
pub use identify::{EnumerateOptions, IdentifiedModel};
pub use mlcm::{MlcMatrix, StdMlcMatrix, WeightedModel};
pub use ndarray::{array, Array2};
pub use random::{GenConfig, ModelKind};
pub use simulate::{NoiseFamily, NoiseSpec, SampleBlock};
pub use taildep::TailDepMatrix;
pub use tol::Tolerance;
