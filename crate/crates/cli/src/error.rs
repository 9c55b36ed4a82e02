use fgig::FgigError;
use thiserror::Error;

/// Failures of a request, each tied to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// The request is malformed or the parameters are out of range.
    #[error("invalid request: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] FgigError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for validation, 3 for numeric failure, 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
