use std::path::Path;

use raftmin_core::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Format(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(source) => CliError::Io { path: "<stream>".into(), source },
            CoreError::FieldFormat(_) => CliError::Format(e.to_string()),
            CoreError::Diverged { .. }
            | CoreError::StepUnderflow { .. }
            | CoreError::UnboundedBelow(_)
            | CoreError::Numerical(_) => CliError::Numerical(e.to_string()),
            CoreError::InvalidGrid(_)
            | CoreError::GridMismatch
            | CoreError::InvalidField(_)
            | CoreError::InvalidParameter(_)
            | CoreError::Geometry(_) => CliError::Config(e.to_string()),
        }
    }
}
