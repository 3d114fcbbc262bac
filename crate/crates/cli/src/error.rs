use std::fmt::Display;

use thiserror::Error;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Infeasible parameters or a failed domain computation.
    #[error("{0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn domain(e: impl Display) -> Self {
        CliError::Domain(e.to_string())
    }

    pub fn parse(e: impl Display) -> Self {
        CliError::Parse(e.to_string())
    }

    pub fn io(path: &str, e: impl Display) -> Self {
        CliError::Io(format!("{path}: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
