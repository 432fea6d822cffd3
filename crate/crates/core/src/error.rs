//! Crate-wide error type. Every constructor and operation validates its
//! inputs and reports the first violation it finds.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight at index {index} is not a strictly positive real number")]
    NonPositiveWeight { index: usize },
    #[error("weights sum to {sum}, expected 1 within {tol}")]
    WeightSum { sum: f64, tol: f64 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("partition is invalid: {reason}")]
    InvalidPartition { reason: String },
    #[error("map is not a permutation: {reason}")]
    InvalidPermutation { reason: String },
    #[error("group table is invalid: {reason}")]
    InvalidGroupTable { reason: String },
    #[error("group element does not belong to the group: {reason}")]
    InvalidGroupElement { reason: String },
    #[error("generator count {got} does not match the group ({expected})")]
    GeneratorCount { expected: usize, got: usize },
    #[error("generators {i} and {j} do not commute")]
    NonCommutingGenerators { i: usize, j: usize },
    #[error("generator {index} does not preserve the weights (point {point})")]
    NotWeightPreserving { index: usize, point: usize },
    #[error("generator images do not form a homomorphism at ({i}, {j})")]
    NotHomomorphism { i: usize, j: usize },
    #[error("actions are defined on different spaces")]
    MismatchedSpaces,
    #[error("actions are defined over different groups")]
    MismatchedGroups,
    #[error("window at stage {stage} is empty")]
    EmptyWindow { stage: u64 },
    #[error("window at stage {stage} has {size} elements, exceeding the cap {cap}")]
    WindowTooLarge { stage: u64, size: u128, cap: u64 },
    #[error("Følner schedule is invalid: {reason}")]
    InvalidSchedule { reason: String },
    #[error("generated group exceeds the enumeration cap {cap}")]
    GroupTooLarge { cap: u64 },
    #[error("pair action does not preserve the support (pair ({w}, {z}) escapes)")]
    SupportNotInvariant { w: usize, z: usize },
    #[error("observable entry {index} is negative; a nonnegative observable is required")]
    NegativeEntry { index: usize },
    #[error("cocycle value {value} at index {index} is outside [0, {modulus})")]
    InvalidCocycle {
        index: usize,
        value: i64,
        modulus: i64,
    },
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },
    #[error("sub-window or shift leaves the grid window: {reason}")]
    OutsideWindow { reason: String },
    #[error("coloring is invalid: {reason}")]
    InvalidColoring { reason: String },
    #[error("file format error: {reason}")]
    Format { reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal consistency failure: {reason}")]
    Internal { reason: String },
}

impl Error {
    pub fn invalid_parameter(reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            reason: reason.into(),
        }
    }

    pub fn format(reason: impl Into<String>) -> Self {
        Error::Format {
            reason: reason.into(),
        }
    }

    pub fn internal(reason: impl Into<String>) -> Self {
        Error::Internal {
            reason: reason.into(),
        }
    }
}
