use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum MotError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("missing required config key `{0}`")]
    MissingKey(&'static str),

    #[error("numerical failure at t = {time}: {reason}")]
    Numerical { time: f64, reason: String },

    #[error("tolerance exceeded: {0}")]
    Tolerance(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl MotError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        MotError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        MotError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            MotError::InvalidParameter { .. }
            | MotError::ConfigSyntax { .. }
            | MotError::UnknownKey(_)
            | MotError::MissingKey(_)
            | MotError::Unsupported(_) => 2,
            MotError::Numerical { .. } | MotError::Tolerance(_) => 3,
            MotError::Io { .. } | MotError::Format { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, MotError>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(MotError::param(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(MotError::param(name, format!("must be > 0, got {value}")))
    }
}
