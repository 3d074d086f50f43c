use std::path::Path;

use crate::formats::FormatError;

/// Command failure, classified for the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn format(path: &Path, e: FormatError) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<scnet_core::Error> for CliError {
    fn from(e: scnet_core::Error) -> Self {
        match e {
            scnet_core::Error::Numeric(m) => CliError::Numeric(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
