use thiserror::Error;

use crate::adcore::AdError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {msg}")]
    Fixture { path: String, msg: String },
    #[error("{path}: row {row}: {msg}")]
    Row { path: String, row: usize, msg: String },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular calibration jacobian (condition estimate {cond:e})")]
    Singular { cond: f64 },
    #[error(transparent)]
    Ad(#[from] AdError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
