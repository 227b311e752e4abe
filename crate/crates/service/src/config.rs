//! Service configuration: a TOML file plus `TUTORBOTS_*` environment
//! overrides. Backend credentials are only read from the environment.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use tutorbots_core::metrics::MetricConstants;
use tutorbots_core::Condition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Stub,
    External,
}

impl std::str::FromStr for BackendKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "stub" => Ok(BackendKind::Stub),
            "external" => Ok(BackendKind::External),
            other => bail!("unknown backend {other:?} (expected stub or external)"),
        }
    }
}

/// Chat-completions endpoint settings. The API key is never read from the
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub base_url: String,
    pub model: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    #[serde(skip)]
    pub api_key: Option<String>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            timeout_secs: 30,
            max_retries: 2,
            backoff_base_ms: 500,
            api_key: None,
        }
    }
}

impl LlmConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Fixed for the lifetime of the process.
    pub condition: Condition,
    pub backend: BackendKind,
    pub listen: SocketAddr,
    pub data_dir: PathBuf,
    /// Router lexicon override; the bundled lexicon when unset.
    pub lexicon_path: Option<PathBuf>,
    /// Role prompt override; the bundled prompts when unset.
    pub roles_path: Option<PathBuf>,
    pub metrics: MetricConstants,
    pub llm: LlmConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            condition: Condition::MultiRole,
            backend: BackendKind::Stub,
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            lexicon_path: None,
            roles_path: None,
            metrics: MetricConstants::default(),
            llm: LlmConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(raw: &str) -> anyhow::Result<ServiceConfig> {
        let config: ServiceConfig = toml::from_str(raw).context("parsing service config")?;
        config.metrics.validate()?;
        Ok(config)
    }

    /// Reads `path` (defaults when `None`) and applies overrides from the
    /// process environment.
    pub fn load(path: Option<&Path>) -> anyhow::Result<ServiceConfig> {
        Self::load_with(path, |k| std::env::var(k).ok())
    }

    pub fn load_with(
        path: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
    ) -> anyhow::Result<ServiceConfig> {
        let mut config = match path {
            Some(p) => {
                let raw = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                Self::from_toml_str(&raw).with_context(|| format!("in {}", p.display()))?
            }
            None => ServiceConfig::default(),
        };
        config.apply_env(env)?;
        Ok(config)
    }

    fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(v) = env("TUTORBOTS_CONDITION") {
            self.condition = v.parse().context("TUTORBOTS_CONDITION")?;
        }
        if let Some(v) = env("TUTORBOTS_BACKEND") {
            self.backend = v.parse().context("TUTORBOTS_BACKEND")?;
        }
        if let Some(v) = env("TUTORBOTS_LISTEN") {
            self.listen = v.parse().context("TUTORBOTS_LISTEN")?;
        }
        if let Some(v) = env("TUTORBOTS_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = env("TUTORBOTS_LEXICON") {
            self.lexicon_path = Some(v.into());
        }
        if let Some(v) = env("TUTORBOTS_LLM_BASE_URL") {
            self.llm.base_url = v;
        }
        if let Some(v) = env("TUTORBOTS_LLM_MODEL") {
            self.llm.model = v;
        }
        self.llm.api_key = env("TUTORBOTS_LLM_API_KEY").filter(|k| !k.is_empty());
        Ok(())
    }

    pub fn log_path(&self) -> PathBuf {
        self.data_dir.join("events.jsonl")
    }
}
