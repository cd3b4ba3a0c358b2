use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An internal numeric consistency check failed, e.g. an edge-constant
    /// quotient that is not close to an integer (the inputs were not wrapped).
    #[error("inconsistent input: {0}")]
    Inconsistency(String),

    #[error("problem too large: {vars} binary variables exceeds cap of {cap}")]
    ProblemTooLarge { vars: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Malformed binary grid file; `offset` is the byte position of the
    /// first offending datum.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    /// Malformed text input; positions are 1-based.
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
