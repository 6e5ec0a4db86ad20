//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An experiment or device configuration is out of range.
    #[error("config error: {0}")]
    Config(String),
    /// Input data failed a structural or range check.
    #[error("validation error: {0}")]
    Validation(String),
    /// Shapes of two interacting objects disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error class to:
    /// 2 for config/validation problems, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}
