use std::time::Duration;

use thiserror::Error;

use crate::domain::{BloomLevel, BotRole};

/// Everything a backend may use to produce a reply. Model-backed clients
/// send `prompt`; the offline stub keys on `role`, `bloom` and `inquiry`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub role: BotRole,
    pub bloom: BloomLevel,
    pub inquiry: String,
    pub system_preamble: String,
    pub prompt: String,
    /// Upper bound on reply length, in whitespace-delimited tokens.
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend timed out after {0:?}")]
    Timeout(Duration),
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend refused the request: {0}")]
    Refused(String),
    #[error("backend returned an empty reply")]
    Empty,
}

impl BackendError {
    /// Timeouts and transient failures may succeed on retry.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Timeout(_) | BackendError::Transient(_))
    }
}

/// A text generator. Implementations must be total: a successful result is
/// never empty text.
pub trait GenerationBackend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &GenerationRequest) -> Result<String, BackendError>;

    /// Longest prompt, in characters, the backend accepts.
    fn max_prompt_chars(&self) -> usize {
        16_000
    }
}

impl<B: GenerationBackend + ?Sized> GenerationBackend for std::sync::Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn complete(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }

    fn max_prompt_chars(&self) -> usize {
        (**self).max_prompt_chars()
    }
}

/// Keeps at most `max_tokens` whitespace-delimited tokens.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> String {
    let mut words = text.split_whitespace();
    let kept: Vec<&str> = words.by_ref().take(max_tokens).collect();
    if words.next().is_none() {
        text.trim().to_owned()
    } else {
        kept.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_keeps_short_text_verbatim() {
        assert_eq!(truncate_tokens("  a  b\nc ", 5), "a  b\nc");
        assert_eq!(truncate_tokens("a b c d", 2), "a b");
        assert_eq!(truncate_tokens("a b", 0), "");
    }

    #[test]
    fn retryable_errors() {
        assert!(BackendError::Timeout(Duration::from_secs(1)).is_retryable());
        assert!(BackendError::Transient("503".into()).is_retryable());
        assert!(!BackendError::Refused("policy".into()).is_retryable());
        assert!(!BackendError::Empty.is_retryable());
    }
}
