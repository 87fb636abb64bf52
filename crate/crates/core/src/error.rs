use thiserror::Error;

/// Broad failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum FiresError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label must be -1 or +1, got {0}")]
    InvalidLabel(f64),

    #[error("empty batch")]
    EmptyBatch,

    #[error("selection size {m} out of range 1..={n_features}")]
    SelectionOutOfRange { m: usize, n_features: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl FiresError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            FiresError::InvalidConfig(_) | FiresError::SelectionOutOfRange { .. } => {
                ErrorKind::Config
            }
            FiresError::NonFinite(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, FiresError>;
