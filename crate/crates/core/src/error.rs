use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped by the kind of failure so that front ends can map
/// them onto exit codes: [`Error::Config`] for bad parameters,
/// [`Error::Data`]/[`Error::ConstantColumn`]/I/O for bad input, and
/// [`Error::Numerical`] for degenerate numerical situations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("data error: {0}")]
    Data(String),
    #[error("constant column '{0}'")]
    ConstantColumn(String),
    #[error("invalid parameter: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
