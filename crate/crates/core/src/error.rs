use thiserror::Error;

/// Errors raised by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run configuration or violated precondition on user input.
    #[error("configuration error: {0}")]
    Config(String),

    /// A table (primes, eigenvalues, factor sieve) does not reach far enough.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Local arithmetic data for a twist is missing.
    #[error("missing local data for curve {curve} at d = {d}: {detail}")]
    DataGap {
        curve: String,
        d: i64,
        detail: String,
    },

    #[error("parse error in {source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}
