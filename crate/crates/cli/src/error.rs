use thiserror::Error;

/// Failures that prevent a report from being produced.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    Input(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<pepkit::Error> for CliError {
    fn from(e: pepkit::Error) -> Self {
        match e {
            pepkit::Error::Input(_) | pepkit::Error::Parse { .. } | pepkit::Error::Dimension { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl CliError {
    /// 1 for solver or infrastructure failures, 3 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 3,
            _ => 1,
        }
    }
}
