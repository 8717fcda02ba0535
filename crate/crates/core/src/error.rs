use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: need at least {required} points, have {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("correlation undefined: {0} is constant")]
    UndefinedCorrelation(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by numerics rather than by the shape or content of the data.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NonFinite(_) | Error::UndefinedCorrelation(_) => true,
            Error::Row { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
