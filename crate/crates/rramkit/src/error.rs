use std::path::PathBuf;

use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Numeric(rram_core::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 for anything wrong with the inputs, 3 for solver and model failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 2,
            CliError::Numeric(rram_core::Error::InvalidParams(_)) => 2,
            CliError::Output { .. } | CliError::Numeric(_) => 3,
        }
    }
}

impl From<rram_core::Error> for CliError {
    fn from(e: rram_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
