//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed, or violates an invariant.
    /// `key` names the offending configuration key or parameter.
    #[error("invalid configuration: {key}: {reason}")]
    Config { key: String, reason: String },

    /// A numeric routine failed to produce a finite result.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A frame trace handed to the auditor is incomplete or inconsistent.
    #[error("frame audit: {0}")]
    Audit(String),

    /// Filesystem failure, tagged with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A data file exists but its contents cannot be interpreted.
    #[error("{}: {msg}", path.display())]
    Malformed { path: PathBuf, msg: String },

    /// An operation was called outside its supported domain.
    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
