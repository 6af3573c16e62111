use std::fmt::Display;

use thiserror::Error;

/// Failures that stop a run before a report can be produced.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("computation error: {0}")]
    Math(#[from] ffmoments::Error),
}

impl CliError {
    pub fn config<E: Display>(e: E) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn io<E: Display>(e: E) -> Self {
        CliError::Io(e.to_string())
    }

    /// Exit status: 2 for configuration and i/o problems, 1 for a failed computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Math(_) => 1,
        }
    }
}
