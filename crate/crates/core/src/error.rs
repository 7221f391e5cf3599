use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulation, learning and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),

    #[error("degenerate fingerprint: column {column} is all zero")]
    DegenerateFingerprint { column: usize },

    #[error("empty sample set: {0}")]
    EmptySamples(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("all fusion weights are zero")]
    ZeroWeights,

    #[error("stage-2 training requires trained stage-1 agents")]
    MissingStageOne,

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("malformed container {path}: {reason}")]
    Container { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors a user fixes by editing the configuration.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. } | Error::Parse { .. } | Error::DegenerateConfig(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
