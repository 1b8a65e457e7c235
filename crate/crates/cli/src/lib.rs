//! Configuration, orchestration and reporting for fixed-point solves and
//! collocation sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;

pub use commands::{cmd_check, cmd_solve, cmd_uq, run_check, run_solve, run_uq, Outcome, UqLevel, UqRun};
pub use config::{ConfigError, RunConfig};
pub use error::CliError;
pub use report::{cmd_report, CheckRow};

/// Reads and validates a config file; `None` gives the reference configuration.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let src =
                std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_toml(&src).map_err(|mut e| {
                e.message = format!("{}: {}", p.display(), e.message);
                CliError::Config(e)
            })
        }
    }
}
