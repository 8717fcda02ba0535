use thiserror::Error;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numeric = 3,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Numeric(String),

    #[error(transparent)]
    Core(#[from] anfis_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> ExitKind {
        match self {
            CliError::Usage(_) => ExitKind::Usage,
            CliError::Data(_) | CliError::Io { .. } => ExitKind::Data,
            CliError::Numeric(_) => ExitKind::Numeric,
            CliError::Core(e) if e.is_numeric() => ExitKind::Numeric,
            CliError::Core(_) => ExitKind::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind() as i32
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
