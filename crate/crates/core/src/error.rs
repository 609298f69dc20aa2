use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("sampling exhausted: accepted {accepted} of {requested} after {drawn} draws")]
    SamplingExhausted {
        requested: usize,
        accepted: usize,
        drawn: usize,
    },

    #[error("grid resolution too coarse: {0}")]
    Resolution(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    #[error("decay fit rejected: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
