use std::path::PathBuf;

use actionrd_codes::CodeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] actionrd_core::Error),

    #[error(transparent)]
    Codes(#[from] CodeError),

    #[error("{0}")]
    Nonconvergence(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

fn core_code(e: &actionrd_core::Error) -> i32 {
    use actionrd_core::Error::*;
    match e {
        MaxIterations { .. } | DivergenceDetected { .. } => 3,
        _ => 2,
    }
}

impl CliError {
    /// 0 success, 2 configuration, 3 nonconvergence, 4 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) | CliError::Codes(CodeError::Core(e)) => core_code(e),
            CliError::Codes(_) => 2,
            CliError::Nonconvergence(_) => 3,
            CliError::Check(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
