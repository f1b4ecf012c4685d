//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input series is too short for the requested operation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient beats: need at least {needed}, got {got}")]
    InsufficientBeats { needed: usize, got: usize },

    /// Spectrum carries no usable power inside the search band.
    #[error("no signal: {0}")]
    NoSignal(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("IBI series cannot be cleaned: every interval is an outlier")]
    Uncleanable,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
