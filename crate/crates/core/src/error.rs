//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by configuration checks, malformed inputs and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// An invalid or unsupported combination of system parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data with the wrong length or content.
    #[error("input error: {0}")]
    Input(String),
    /// A scenario file that could not be parsed.
    #[error("scenario file error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
