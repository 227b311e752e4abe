use thiserror::Error;

/// Errors raised by the core vocabulary, router, metrics and analytics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("message belongs to session {found}, expected {expected}")]
    SessionMismatch { expected: String, found: String },

    #[error("timestamp regression: {found} precedes last message at {last}")]
    TimestampRegression { last: u64, found: u64 },

    #[error("{what} {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("failed to parse {source_name}: {message}")]
    Parse {
        source_name: String,
        message: String,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(source_name: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
