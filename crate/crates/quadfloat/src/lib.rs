//! File formats and command implementations for the `quadfloat` binary.
//!
//! The numerics live in [`quadfloat_core`]; this crate reads TOML configs, writes
//! trajectory CSV and JSON reports, and maps failures to exit codes.

pub mod commands;
pub mod config;
pub mod report;
pub mod trajectory_csv;

use thiserror::Error;

/// Exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    /// Bad command-line usage (reported by the argument parser).
    pub const USAGE: i32 = 2;
    pub const CONFIG_READ: i32 = 3;
    pub const INVALID_INPUT: i32 = 4;
    pub const SIMULATION_ABORTED: i32 = 5;
    pub const NO_FEASIBLE_GAINS: i32 = 6;
    pub const OUTPUT: i32 = 7;
}

pub const EXIT_CODE_HELP: &str = "\
Exit codes:
  0  success
  1  vehicle parameters failed validation
  2  bad command-line usage
  3  config file missing or unparsable
  4  invalid scenario, parameter or input data
  5  simulation aborted (partial outputs are written)
  6  tuning found no feasible gains
  7  could not write outputs";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("config: {0}")]
    ConfigRead(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0}")]
    SimulationAborted(String),
    #[error("{0}")]
    NoFeasibleGains(String),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => exit::VALIDATION_FAILED,
            CliError::ConfigRead(_) => exit::CONFIG_READ,
            CliError::InvalidInput(_) => exit::INVALID_INPUT,
            CliError::SimulationAborted(_) => exit::SIMULATION_ABORTED,
            CliError::NoFeasibleGains(_) => exit::NO_FEASIBLE_GAINS,
            CliError::Output(_) => exit::OUTPUT,
        }
    }
}

impl From<quadfloat_core::Error> for CliError {
    fn from(e: quadfloat_core::Error) -> Self {
        match e {
            quadfloat_core::Error::NoFeasibleGains(_) => CliError::NoFeasibleGains(e.to_string()),
            other => CliError::InvalidInput(other.to_string()),
        }
    }
}
