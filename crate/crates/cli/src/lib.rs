//! Command-line driver: CSV tables with a `key=value` manifest beside each.

pub mod args;
pub mod commands;
pub mod output;

use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("state {id}: {source}")]
    Numerical { id: usize, source: steerq::Error },
    #[error("state {id}: consistency check failed: {detail}")]
    Inconsistent { id: usize, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn numerical(id: usize, source: steerq::Error) -> Self {
        Self::Numerical { id, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Numerical { .. } | Self::Inconsistent { .. } => EXIT_NUMERICAL,
            Self::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
