//! Command-line front end: configuration, figure sweeps and file output.

pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;

use thiserror::Error;

use crate::error::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration keys or values.
    #[error("{0}")]
    Usage(String),
    #[error("{key}: {message}")]
    InvalidKey { key: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("plot rendering failed: {0}")]
    Plot(String),
}

impl CliError {
    pub(crate) fn key(key: &str, message: impl Into<String>) -> Self {
        CliError::InvalidKey {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for usage and validation errors, 2 for runtime and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::InvalidKey { .. } | CliError::Model(_) => 1,
            CliError::Io { .. } | CliError::Plot(_) => 2,
        }
    }
}
