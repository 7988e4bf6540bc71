use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph generation failed: {0}")]
    Generation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Input violates a structural precondition (shape, symmetry).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error("gain design infeasible: {0}")]
    Design(String),

    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status used by the command-line runner.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Json(_) | Error::Parameter(_) => 2,
            Error::Io(_) | Error::Csv(_) => 2,
            _ => 3,
        }
    }
}
