use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] wavepacket_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for bad configuration or parameters, 3 for numerical instability,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use wavepacket_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::NumericalInstability(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } | CliError::Csv { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
