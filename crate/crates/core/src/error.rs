use std::path::PathBuf;

/// Errors raised by the simulator library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A transform or buffer had an unsupported length.
    #[error("invalid size: {0}")]
    Sizing(String),
    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Two inputs that must agree in shape did not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A scenario configuration failed validation.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// File I/O failed.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// CSV encoding or decoding failed.
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors that stem from an invalid scenario or parameter set.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidParameter(_)
                | Error::Sizing(_)
                | Error::DimensionMismatch(_)
        )
    }
}
