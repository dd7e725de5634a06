//! File formats, configuration and command implementations for the `rramkit`
//! binary. All numerics live in `rram-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod formats;

pub use error::{CliError, CliResult};

/// Successful command result; `Fail` maps to exit code 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}
