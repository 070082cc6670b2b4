//! Configuration, dispatch and writers behind the `symbill` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Experiment, OutputConfig, RunConfig, SolverConfig};
pub use run::{execute, run, RunOutcome, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] symbill_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
