use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The metric vanishes (only at the origin of the (v, w) chart).
    #[error("degenerate metric at {0}")]
    DegenerateMetric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Grid spacing too coarse for the requested operation.
    #[error("under-resolved: {0}")]
    UnderResolved(String),

    /// A field required to be compactly supported reaches the mask edge.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// Support too close to the periodic box edge for a spectral multiplier.
    #[error("wraparound risk: {0}")]
    WraparoundRisk(String),

    #[error("invalid estimate case: {0}")]
    InvalidCase(String),

    #[error("config error at key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
