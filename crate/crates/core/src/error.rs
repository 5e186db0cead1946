use thiserror::Error;

pub type Result<T> = std::result::Result<T, BoundError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("transition matrix row {row} sums to {sum} (expected 1)")]
    NotStochastic { row: usize, sum: f64 },

    #[error("index out of range: {what} {index} >= {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("input distribution optimizer did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("support condition violated: q_s component {min_component:e} at s = {s}")]
    SupportCondition { s: f64, min_component: f64 },

    #[error("per-letter mu_k depends on the input letter (spread {spread:e} at s = {s})")]
    LetterDependence { s: f64, spread: f64 },

    #[error("measures have disjoint supports")]
    DisjointSupport,

    #[error("bound requires a discrete channel")]
    RequiresDiscrete,

    #[error("non-finite intermediate value at output {output}, input {input}")]
    NonFinite { output: usize, input: usize },

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> BoundError {
    BoundError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
