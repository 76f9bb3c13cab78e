use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("numerical failure: {message} (error estimate {estimate:e})")]
    Numerical { message: String, estimate: f64 },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("problem too large: {0}")]
    Size(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn numerical(msg: impl Into<String>, estimate: f64) -> Error {
    Error::Numerical {
        message: msg.into(),
        estimate,
    }
}
