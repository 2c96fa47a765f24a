use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid experiment config, anchored to a source line.
    #[error("{origin}:{line}: {message}")]
    Config {
        origin: String,
        line: usize,
        message: String,
    },
    /// Malformed input data or an unknown experiment.
    #[error("{0}")]
    Input(String),
    #[error("simulation failed: {0}")]
    Runtime(#[from] costep::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Input(_) => 2,
            CliError::Runtime(_) | CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
