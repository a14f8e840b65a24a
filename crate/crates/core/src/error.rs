use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the physical or mathematical domain of an operation.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// An iteration failed to converge or produced an unphysical quantity.
    #[error("numerical failure: {message} (last value {last})")]
    Numerical { message: String, last: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
