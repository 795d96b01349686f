//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed input data: bad CSV cells, missing columns, label problems.
    #[error("data error: {0}")]
    Data(String),

    /// Shape or index disagreement between two structures.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A request that no object can satisfy (out-of-range odds shift,
    /// unsplittable query family, non-invertible shuffle, ...).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Numeric failure: degenerate denominators, non-convergence treated as
    /// fatal by a caller, violated preconditions of a bound.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
