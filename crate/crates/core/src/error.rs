use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient beliefs: pool has {0} element(s), at least 2 required")]
    InsufficientBeliefs(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no unique Nash reference for q = {0}; only q = 0 and q = 1 are known cases")]
    NoNashReference(f64),

    #[error("failed to draw p strictly inside ({lo}, {hi}) after {attempts} attempts")]
    OpenIntervalDraw { lo: f64, hi: f64, attempts: usize },

    #[error("nothing to write: {0}")]
    EmptyResults(&'static str),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid manifest or config {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("manifest validation failed: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
