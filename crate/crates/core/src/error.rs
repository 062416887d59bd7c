use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state or name does not belong to the model it was used with.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("action `{action}` is not applicable in state {state}")]
    PreconditionViolation { action: String, state: String },

    #[error("reachable state count exceeds the configured cap of {limit}")]
    Capacity { limit: usize },

    /// A grounded transform whose parameters no longer resolve in the model it is applied to.
    #[error("stale grounding `{transform}`: {reason}")]
    GroundingStale { transform: String, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Structural error in an input file, located by field path.
    #[error("{field}: {message}")]
    Field { field: String, message: String },

    /// Syntax error in an input file, located by line and column.
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("fingerprint mismatch: table was trained on a different model")]
    Fingerprint,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Field { field: field.into(), message: message.into() }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
