use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the multiresolution layer, the solvers and the driver.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data does not match the dyadic grid it is supposed to live on.
    #[error("malformed dyadic grid: {0}")]
    MalformedGrid(String),

    /// The periodic Poisson problem has no solution for a source with nonzero mean.
    #[error("Poisson source has nonzero mean {mean:e} (tolerance {tolerance:e})")]
    Solvability { mean: f64, tolerance: f64 },

    /// Every coefficient of the distribution fell below the threshold.
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// A value became NaN or infinite.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        key: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    ConfigSyntax(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short category used by the CLI for its one-line failure report.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config { .. } | Error::ConfigSyntax(_) => "config error",
            Error::Io { .. } | Error::Parse { .. } => "I/O error",
            Error::MalformedGrid(_)
            | Error::Solvability { .. }
            | Error::DegenerateState(_)
            | Error::NonFinite(_) => "numerical error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
