use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    /// The config file could not be parsed; `message` carries line and field.
    #[error("malformed config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("invalid plan: field `{field}`: {message}")]
    Plan { field: &'static str, message: String },
    #[error("{what} = {value} exceeds the limit {limit}")]
    Capacity { what: &'static str, value: usize, limit: usize },
    #[error("{failed} of {total} realizations failed (more than 1%)")]
    TooManyFailures { failed: usize, total: usize },
    #[error(transparent)]
    Core(macrospin::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<macrospin::Error> for ExpError {
    fn from(e: macrospin::Error) -> Self {
        match e {
            macrospin::Error::Capacity { what, value, limit } => ExpError::Capacity { what, value, limit },
            other => ExpError::Core(other),
        }
    }
}

impl ExpError {
    pub fn plan(field: &'static str, message: impl Into<String>) -> Self {
        ExpError::Plan {
            field,
            message: message.into(),
        }
    }

    /// 2 for configuration problems, 3 for capacity violations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Config { .. } | ExpError::Plan { .. } => 2,
            ExpError::Capacity { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = ExpError> = std::result::Result<T, E>;
