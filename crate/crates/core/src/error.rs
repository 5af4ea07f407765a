use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// The CLI maps [`Error::is_numerical`] failures to exit code 3 and all
/// others to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("memory budget exceeded: {what} needs {requested} amplitudes, limit is {limit}")]
    MemoryBudget {
        what: String,
        requested: u128,
        limit: u128,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solver error: {message} (residual {residual:.3e})")]
    Solver { message: String, residual: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
