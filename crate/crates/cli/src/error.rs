use std::path::Path;

use loadstab_core::ErrorCategory;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config keys or values.
    #[error("usage error: {0}")]
    Usage(String),
    /// Unreadable, unwritable or malformed files.
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] loadstab_core::Error),
}

impl CliError {
    pub fn usage(key: &str, reason: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{key}: {reason}"))
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }

    /// 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Usage => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numeric => 3,
            },
        }
    }
}
