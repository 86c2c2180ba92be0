// SPDX-License-Identifier: Apache-2.0
//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong when building or analysing a model.
///
/// Node indices carried by the variants are 0-based, as everywhere in the
/// library API.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("node {node} is out of range for a graph with {d} nodes")]
    NodeOutOfRange { node: usize, d: usize },

    #[error("a graph needs at least one node")]
    EmptyGraph,

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),

    #[error("the edge set contains a directed cycle through node {0}")]
    Cycle(usize),

    #[error("ordering is not a permutation of 0..{d}: {detail}")]
    NotAPermutation { d: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry ({row}, {col}) = {value} is invalid: {reason}")]
    InvalidEntry {
        row: usize,
        col: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("tail dependence matrix is not symmetric at ({row}, {col}): {upper} vs {lower}")]
    Asymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("entry ({row}, {col}) = {value:e} is too close to zero to classify")]
    IllConditionedZero { row: usize, col: usize, value: f64 },

    #[error("sign pattern is not the reachability matrix of a DAG: {0}")]
    NotReachability(String),

    #[error("sign pattern of the tail dependence matrix disagrees with the reachability at ({row}, {col})")]
    PatternMismatch { row: usize, col: usize },

    #[error("recursion produced a negative value {value:e} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("recursion produced a non-positive diagonal entry {value:e} at node {node}")]
    NonPositiveDiagonal { node: usize, value: f64 },

    #[error("weight for {what} must be finite and positive, got {value}")]
    NonPositiveWeight { what: String, value: f64 },

    #[error("tail index must be finite and positive, got {0}")]
    InvalidAlpha(f64),

    #[error("node set is not a chi-clique: chi({0}, {1}) > 0")]
    NotAClique(usize, usize),

    #[error("node {node} has no initial node with positive tail dependence")]
    NoInitialAncestor { node: usize },

    #[error("no unique bijection between the initial sets: {0}")]
    NoBijection(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("refusing to enumerate orderings for d = {d} (limit {max_d})")]
    TooLarge { d: usize, max_d: usize },

    #[error("only {found} tail exceedances, at least {required} are needed")]
    TooFewExceedances { found: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
