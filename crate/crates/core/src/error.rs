use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate system: smallest singular value {smallest:e} below {threshold:e}")]
    DegenerateSystem { smallest: f64, threshold: f64 },

    #[error("{solver} did not converge after {iterations} iterations")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        /// Last iterate, kept for diagnostics.
        last: Vec<f64>,
    },

    #[error("attack is degenerate: {0}")]
    DegenerateAttack(String),

    #[error("brute force refused: {count} candidate pairs exceed size guard {guard}")]
    SizeGuardExceeded { count: u128, guard: u128 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
