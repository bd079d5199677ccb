use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a bound or schedule function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Inconsistent inputs, e.g. mixed reward-list lengths or mismatched dimensions.
    #[error("configuration error: {0}")]
    Config(String),

    /// An arm was asked for more rewards than its list holds.
    #[error("arm {arm_id}: cannot pull {requested} more rewards, only {remaining} left")]
    Overdraw {
        arm_id: usize,
        requested: usize,
        remaining: usize,
    },

    /// The reward range has zero width, so the concentration bound is undefined.
    #[error("degenerate reward range [{low}, {high}]")]
    DegenerateRange { low: f64, high: f64 },

    #[error("{path}: bad magic {found:?}, expected {expected:?}")]
    BadMagic {
        path: PathBuf,
        found: [u8; 4],
        expected: [u8; 4],
    },

    #[error("{path}: truncated payload, expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

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
