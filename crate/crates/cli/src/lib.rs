//! Library side of the `selfosc` command-line tool: configuration, scenario
//! presets, runners for every subcommand, sweeps and validation.

// `!(x > 0.0)` style guards reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod validate;

use thiserror::Error;

pub use config::{parse_config, parse_config_str, preset, ConfigError, RunConfig, ScenarioName};
pub use output::{Observable, ResultBundle, Status};
pub use run::CoefficientCache;

/// Failures of a command; [`RunError::exit_code`] gives the process status.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] selfosc_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Exit status for success.
pub const EXIT_OK: u8 = 0;
/// Exit status for I/O and other environment failures.
pub const EXIT_IO: u8 = 1;
/// Exit status for configuration errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for validation tolerance breaches.
pub const EXIT_VALIDATION: u8 = 4;

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Io { .. } | RunError::Csv(_) | RunError::Pool(_) => EXIT_IO,
        }
    }
}
