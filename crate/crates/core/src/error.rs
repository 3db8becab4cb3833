use thiserror::Error;

/// Errors raised across the library.
///
/// The variants map onto the CLI exit scheme: [`Error::Config`] and
/// [`Error::Usage`] are configuration problems (exit 2), while
/// [`Error::Data`], [`Error::Domain`] and [`Error::Numeric`] are numeric
/// failures (exit 3). A violated bound is not an error; it is reported as a
/// failed check.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) | Error::Parse { .. } | Error::Io(_) => 2,
            Error::Data(_) | Error::Domain(_) | Error::Numeric(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
