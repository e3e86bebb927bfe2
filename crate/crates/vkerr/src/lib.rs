//! Command-line driver for `vkerr-core`: configuration files, CSV/JSON
//! output, run manifests and the figure datasets.

pub mod cli;
pub mod config;
pub mod figures;
pub mod output;

use thiserror::Error;
use vkerr_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unstable operating point: {0}")]
    Unstable(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unstable(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnstableState => CliError::Unstable(e.to_string()),
            CoreError::NonFinite { .. }
            | CoreError::UnreliableRegime { .. }
            | CoreError::InsufficientData { .. }
            | CoreError::DegenerateBlock => CliError::Simulation(e.to_string()),
            CoreError::InvalidParameter(_) | CoreError::InvalidConfig(_) | CoreError::InvalidGrid => {
                CliError::Config(e.to_string())
            }
            other => CliError::Core(other),
        }
    }
}
