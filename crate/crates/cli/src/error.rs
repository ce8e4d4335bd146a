use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. Every refusal has its own code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Ok = 0,
    Internal = 1,
    Usage = 2,
    Io = 3,
    Parse = 4,
    GapCollision = 5,
    TooLarge = 6,
    Numerical = 7,
    InvalidState = 8,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qwalk_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: qwalk_core::Error,
    },

    #[error("{}: line {line}: {message}", path.display())]
    InitFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        use qwalk_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Parse { .. } | E::InvalidGraph(_) => ExitStatus::Parse,
                E::GapCollision { .. } => ExitStatus::GapCollision,
                E::TooLarge { .. } => ExitStatus::TooLarge,
                E::InvalidInput(_) | E::InvalidState(_) => ExitStatus::InvalidState,
                E::Numerical(_)
                | E::Linalg(_)
                | E::Degenerate(_)
                | E::UnresolvedDegeneracy(_)
                | E::NotSupported(_) => ExitStatus::Numerical,
            },
            CliError::Io { .. } => ExitStatus::Io,
            CliError::Input { .. } | CliError::InitFile { .. } => ExitStatus::Parse,
            CliError::Config(_) => ExitStatus::Usage,
            CliError::Json(_) => ExitStatus::Internal,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
