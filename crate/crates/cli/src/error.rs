use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: invalid {field}: {reason}", path.display())]
    Format {
        path: PathBuf,
        field: &'static str,
        reason: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] motioncs::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            field,
            reason: reason.into(),
        }
    }

    /// 0 success, 1 usage or config, 2 solver divergence, 3 I/O or format.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => 3,
            CliError::Config(_) => 1,
            CliError::Core(motioncs::Error::Divergence { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
