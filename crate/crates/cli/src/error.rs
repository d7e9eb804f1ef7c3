use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] ruin_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 usage/parse, 3 mathematical precondition, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Core(e) if e.is_precondition() => 3,
            Self::Core(e) if e.is_numerical() => 4,
            Self::Core(_) => 2,
            Self::Io(_) | Self::Csv(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
