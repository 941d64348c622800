use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its allowed range.
    #[error("invalid {name} = {value}: must satisfy {bound}")]
    Validation {
        name: String,
        value: f64,
        bound: String,
    },

    /// Parameters are individually valid but contradict each other.
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    /// Numerical integration could not reach the requested accuracy.
    #[error("insufficient quadrature resolution: {0}")]
    Resolution(String),

    /// A statistical estimate has no defined value (e.g. division by zero counts).
    #[error("undefined estimate: {0}")]
    Undefined(String),

    #[error("incompatible histograms: {0}")]
    Incompatible(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("preset mismatch: {0}")]
    Preset(String),

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(name: impl Into<String>, value: f64, bound: impl Into<String>) -> Self {
        Error::Validation {
            name: name.into(),
            value,
            bound: bound.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Inconsistent(_)
                | Error::NoSolution(_)
                | Error::Config { .. }
                | Error::Preset(_)
        )
    }
}

/// Fails with a validation error naming `name` unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &str, value: f64, bound: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(name, value, bound))
    }
}
