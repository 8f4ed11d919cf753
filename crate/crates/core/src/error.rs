use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A problem instance, list, or feedback value violates a structural invariant.
    #[error("structural error: {0}")]
    Structural(String),

    /// An index referenced an item outside the ground set.
    #[error("item index {index} out of range for ground set of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// An iterative numeric routine failed to converge.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A matrix that must be positive definite was not.
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// The experiment configuration is inconsistent.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
