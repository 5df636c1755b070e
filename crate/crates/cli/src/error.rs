use std::path::PathBuf;

use delaywave_core::Error as CoreError;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Numerical(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Core(e) => match e {
                CoreError::Inadmissible(_)
                | CoreError::InvalidArgument { .. }
                | CoreError::DegenerateGrid { .. }
                | CoreError::NonFiniteInitialData { .. }
                | CoreError::Cfl { .. }
                | CoreError::TooLarge { .. } => EXIT_VALIDATION,
                _ => EXIT_RUNTIME,
            },
            CliError::Io { .. } | CliError::Numerical(_) => EXIT_RUNTIME,
        }
    }
}
