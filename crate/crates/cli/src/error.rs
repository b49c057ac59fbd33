use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config text does not deserialize; `field` is the dotted key path.
    #[error("{}`{field}`: {message}", file.as_ref().map(|f| format!("{}: ", f.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        field: String,
        message: String,
    },

    /// The config deserializes but violates a model assumption, or a
    /// computation rejected its inputs.
    #[error(transparent)]
    Invalid(#[from] wavewell::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
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

    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Parse { field, message, .. } => CliError::Parse {
                file: Some(path.to_path_buf()),
                field,
                message,
            },
            other => other,
        }
    }

    /// 2 for bad input (config, arguments), 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Usage(_) => 2,
            CliError::Invalid(wavewell::Error::Config { .. }) => 2,
            _ => 1,
        }
    }
}
