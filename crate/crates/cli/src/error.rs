use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("manifest {}: {reason}", path.display())]
    Manifest { path: PathBuf, reason: String },

    #[error(transparent)]
    Solver(#[from] landau_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn is_gate(e: &landau_core::Error) -> bool {
    match e {
        landau_core::Error::GateFailed(_) => true,
        landau_core::Error::NodeFailed { source, .. } => is_gate(source),
        _ => false,
    }
}

impl CliError {
    /// 1 for a failed admissibility gate, 2 for usage and input errors, 3 for
    /// solver and output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Manifest { .. } => EXIT_USAGE,
            CliError::Solver(e) if is_gate(e) => EXIT_CHECK_FAILED,
            CliError::Solver(_) | CliError::Io { .. } => EXIT_SOLVER,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
