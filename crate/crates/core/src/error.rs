use thiserror::Error;

/// Errors raised across instance handling, model building, solving and analysis.
#[derive(Debug, Error)]
pub enum HubError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("model is infeasible by construction: {0}")]
    InfeasibleByConstruction(String),

    #[error("decode error: violated {constraint}: {detail}")]
    Decode { constraint: String, detail: String },

    #[error("separation contract violated: {0}")]
    Contract(String),

    #[error("oracle refused: {0}")]
    OracleGuard(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("instance mismatch: solution was computed for instance {expected}, got {found}")]
    InstanceMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HubError>;

impl HubError {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        HubError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn decode(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        HubError::Decode {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }
}
