use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the training stack.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, dimensions or names that cannot work together.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called out of order or with invalid arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// A NaN or infinity showed up where training cannot continue.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
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

impl Error {
    /// Configuration and usage mistakes are the caller's fault; everything
    /// else is a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Usage(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
