//! Experiment harness for the jedi-core toolkit: config loading, seeded
//! runs with CSV/JSON artifacts, method comparison reports, trajectory
//! replay and centroid export.

pub mod compare;
pub mod config;
pub mod maze_file;
pub mod output;
pub mod replay;
pub mod runner;
pub mod workers;

use thiserror::Error;

/// Harness errors are classified by exit code: configuration problems exit
/// with 1, runtime failures with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub(crate) fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Runtime(format!("{context}: {err}"))
    }
}
