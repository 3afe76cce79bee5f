//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight {weight}: {reason}")]
    InvalidWeight { weight: f64, reason: &'static str },

    #[error("pole: {0}")]
    Pole(String),

    #[error("insufficient decay: integrand decays like (1-|z|^2)^{have}, need at least {need}")]
    InsufficientDecay { have: f64, need: f64 },

    #[error("point {0} lies outside the allowed region")]
    OutOfRange(String),

    #[error("truncation tail {tail:e} exceeds tolerance {tol:e}")]
    TailExceeded { tail: f64, tol: f64 },

    #[error("spectrum point {0} outside [0, 1]")]
    SpectrumOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error in `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
