use schottky_core::error::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("argument `--{arg}`: {message}")]
    Argument { arg: &'static str, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl LabError {
    /// 2 for bad input, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core(CoreError::Convergence(_) | CoreError::Insufficient(_)) => 3,
            LabError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        LabError::Config { field: field.into(), message: message.into() }
    }

    pub(crate) fn argument(arg: &'static str, message: impl Into<String>) -> Self {
        LabError::Argument { arg, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
