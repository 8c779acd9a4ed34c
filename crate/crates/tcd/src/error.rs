//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by scene I/O, statistical kernels, discovery methods,
/// scene synthesis, and the evaluation harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient samples: need at least {required}, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("coordinate descent did not converge within {sweeps} sweeps")]
    LassoNonConvergence {
        sweeps: usize,
        /// Best iterate found before giving up.
        best: Box<crate::stats::lasso::SparseFit>,
    },

    #[error("unknown method {0:?}; valid methods: pwgc, mvgc, varlingam, timino, pcmci, dynotears, random")]
    UnknownMethod(String),

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
