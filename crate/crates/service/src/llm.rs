//! Client for an OpenAI-style `/chat/completions` endpoint.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use tokio::runtime::Handle;
use tracing::{debug, warn};

use tutorbots_core::agents::{truncate_tokens, BackendError, GenerationBackend, GenerationRequest};

use crate::config::LlmConfig;
use crate::scrub::scrub_pii;

/// Exponential backoff: the n-th retry waits `base * 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Backoff {
    pub max_retries: u32,
    pub base: Duration,
}

impl Backoff {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base.saturating_mul(1u32 << retry.min(16))
    }
}

/// Runs `op` until it succeeds, fails with a non-retryable error, or the
/// retries are used up.
pub async fn with_retries<F, Fut>(backoff: Backoff, mut op: F) -> Result<String, BackendError>
where
    F: FnMut() -> Fut,
    Fut: std::future::Future<Output = Result<String, BackendError>>,
{
    let mut retry = 0;
    loop {
        match op().await {
            Err(e) if e.is_retryable() && retry < backoff.max_retries => {
                let wait = backoff.delay(retry);
                warn!(error = %e, ?wait, "retrying generation");
                tokio::time::sleep(wait).await;
                retry += 1;
            }
            other => return other,
        }
    }
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

pub struct ChatCompletionsBackend {
    client: reqwest::Client,
    config: LlmConfig,
    endpoint: String,
    runtime: Handle,
}

impl ChatCompletionsBackend {
    /// Must be called inside a Tokio runtime; `complete` later blocks on that
    /// runtime and so must run off its worker threads.
    pub fn new(config: LlmConfig) -> anyhow::Result<ChatCompletionsBackend> {
        let client = reqwest::Client::builder().timeout(config.timeout()).build()?;
        let endpoint = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        Ok(ChatCompletionsBackend {
            client,
            config,
            endpoint,
            runtime: Handle::try_current()?,
        })
    }

    fn backoff(&self) -> Backoff {
        Backoff {
            max_retries: self.config.max_retries,
            base: Duration::from_millis(self.config.backoff_base_ms),
        }
    }

    async fn attempt(&self, body: &serde_json::Value) -> Result<String, BackendError> {
        let mut req = self.client.post(&self.endpoint).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().await.map_err(|e| self.classify(e))?;
        let status = resp.status();
        let text = resp.text().await.map_err(|e| self.classify(e))?;
        debug!(%status, body = %scrub_pii(&text), "completion response");
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Refused(format!("status {status}")));
        }
        let parsed: CompletionResponse = serde_json::from_str(&text)
            .map_err(|e| BackendError::Transient(format!("malformed response: {e}")))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Err(BackendError::Empty);
        }
        Ok(content)
    }

    fn classify(&self, e: reqwest::Error) -> BackendError {
        if e.is_timeout() {
            BackendError::Timeout(self.config.timeout())
        } else {
            BackendError::Transient(e.without_url().to_string())
        }
    }
}

impl GenerationBackend for ChatCompletionsBackend {
    fn name(&self) -> &str {
        "chat-completions"
    }

    fn complete(&self, request: &GenerationRequest) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.system_preamble},
                {"role": "user", "content": request.prompt},
            ],
            "max_tokens": request.max_tokens,
        });
        debug!(body = %scrub_pii(&body.to_string()), "completion request");
        let reply = self
            .runtime
            .block_on(with_retries(self.backoff(), || self.attempt(&body)))?;
        Ok(truncate_tokens(&reply, request.max_tokens))
    }
}
