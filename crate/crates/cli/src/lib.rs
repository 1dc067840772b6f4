//! Config-driven command-line front end for the attractor solver: builds
//! drivers from a TOML document, runs the solvers, and emits deterministic
//! machine-readable results.

use std::fmt;

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

pub use config::{parse_config, DriverSpec, ExperimentConfig, OutputFormat};

/// Top-level CLI error, carrying the process exit code policy:
/// 1 verification failure, 2 configuration or I/O error, 3 unconverged.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Unconverged(String),
    VerificationFailed,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(message) => write!(f, "{message}"),
            CliError::Io(message) => write!(f, "{message}"),
            CliError::Unconverged(message) => write!(f, "{message}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Unconverged(_) => 3,
        }
    }
}
