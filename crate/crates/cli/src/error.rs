use credal_core::CredalError;
use thiserror::Error;

/// Command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CredalError> for CliError {
    fn from(e: CredalError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
