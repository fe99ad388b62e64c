use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value does not fit the declared bit-width/polarity, or an index is out of bounds.
    #[error("range error: {0}")]
    Range(String),

    /// A configuration parameter is invalid (unsupported bit-width, non power-of-two base, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A unary stream violates the encoder's invariants.
    #[error("malformed unary stream: {0}")]
    Format(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Accumulator left its declared width. Never wraps silently.
    #[error("accumulator overflow: {0}")]
    Overflow(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("no power profile entry for {0}")]
    ProfileMiss(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Format(_) => 3,
            Error::Range(_)
            | Error::Parameter(_)
            | Error::Shape(_)
            | Error::Empty(_)
            | Error::ProfileMiss(_) => 4,
            Error::Overflow(_) => 5,
            Error::Mismatch(_) => 6,
            Error::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
