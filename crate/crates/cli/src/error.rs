use std::io;
use std::path::{Path, PathBuf};

use fmm2d_core::FmmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadArgs(String),

    #[error(transparent)]
    Fmm(#[from] FmmError),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 bad arguments, 3 degenerate input, 4 I/O failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadArgs(_) => 2,
            CliError::Fmm(FmmError::InvalidConfig(_)) => 2,
            CliError::Fmm(_) => 3,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Csv(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
