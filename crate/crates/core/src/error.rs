use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("selection failed: {0}")]
    Selection(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by bad user input rather than numerical trouble.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
