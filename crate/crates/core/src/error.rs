//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator has no recorded solution; this operation requires x*")]
    MissingSolution,

    #[error("missing operator parameter `{0}` required for this algorithm")]
    MissingParameter(&'static str),

    #[error(
        "step size {gamma} is not admissible for {algorithm}: the bound requires gamma < {bound}"
    )]
    InadmissibleStepSize {
        algorithm: &'static str,
        gamma: f64,
        bound: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("outside the domain of the formula: {0}")]
    Domain(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
