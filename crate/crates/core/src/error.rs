use thiserror::Error;

use crate::sdp::Status;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a structural invariant (shape, Hermiticity, normalisation, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A combinatorial guard (number of parent outcomes, labelings, ...) was exceeded.
    #[error("problem too large: {what} is {size}, limit {limit}")]
    SizeGuard {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    /// Parameters outside the admissible region of a construction.
    #[error("parameter outside admissible domain: {0}")]
    Domain(String),

    /// The SDP solver did not reach an optimal point.
    #[error("solver failed with status {status:?} after {iterations} iterations: {detail}")]
    Solver {
        status: Status,
        iterations: usize,
        detail: String,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
