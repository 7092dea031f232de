//! Unified error type shared by every module in the crate.

/// Crate-wide error enum. Variants carry enough context to diagnose the
/// failure without a debugger: shapes for shape errors, line numbers for
/// parse errors, byte offsets for container errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: shape mismatch: {lhs} vs {rhs}")]
    Shape {
        op: &'static str,
        lhs: String,
        rhs: String,
    },
    #[error("invalid parameter {name}: {message}")]
    Parameter { name: &'static str, message: String },
    #[error("data error at {location}: {message}")]
    Data { location: String, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("range error: {0}")]
    Range(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(
        op: &'static str,
        lhs: impl std::fmt::Debug,
        rhs: impl std::fmt::Debug,
    ) -> Self {
        Error::Shape {
            op,
            lhs: format!("{lhs:?}"),
            rhs: format!("{rhs:?}"),
        }
    }

    pub(crate) fn parameter(name: &'static str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn data(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            location: location.into(),
            message: message.into(),
        }
    }
}
