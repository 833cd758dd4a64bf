use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid user-supplied input (parameters out of range, malformed values).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Exact line search is undefined at a stationary point.
    #[error("gradient vanishes: iterate is at the optimum")]
    AtOptimum,

    /// A search-direction policy or a post-condition was violated.
    #[error("contract violated at iteration {iteration}: {detail}")]
    Contract { iteration: usize, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operation was called on an object in the wrong state
    /// (for example a non-optimal solver result).
    #[error("invalid state: {0}")]
    State(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
