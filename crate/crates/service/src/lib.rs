//! Deployable tutoring service: HTTP API, message pipeline, event log,
//! anonymization and the operator CLI's building blocks.

pub mod analysis;
pub mod api;
pub mod config;
pub mod eval;
pub mod eventlog;
pub mod import;
pub mod llm;
pub mod scrub;
pub mod store;

use std::sync::Arc;

use anyhow::Context;

use tutorbots_core::agents::{GenerationBackend, RolePrompts, StubBackend};
use tutorbots_core::metrics::Evaluator;
use tutorbots_core::RouterLexicon;

use crate::api::AppState;
use crate::config::{BackendKind, ServiceConfig};
use crate::store::{Store, StoreOptions};

pub use crate::eventlog::{replay_log, EventLogRecord, Payload};
pub use crate::scrub::scrub_pii;
pub use crate::store::{Exchange, ServiceError};

/// The generation backend named by the config. The external client must be
/// built inside a Tokio runtime.
pub fn build_backend(config: &ServiceConfig) -> anyhow::Result<Arc<dyn GenerationBackend>> {
    Ok(match config.backend {
        BackendKind::Stub => Arc::new(StubBackend::shipped()),
        BackendKind::External => Arc::new(llm::ChatCompletionsBackend::new(config.llm.clone())?),
    })
}

pub fn load_lexicon(config: &ServiceConfig) -> anyhow::Result<RouterLexicon> {
    match &config.lexicon_path {
        Some(p) => RouterLexicon::from_path(p).with_context(|| format!("loading lexicon {}", p.display())),
        None => Ok(RouterLexicon::shipped()),
    }
}

pub fn load_prompts(config: &ServiceConfig) -> anyhow::Result<RolePrompts> {
    match &config.roles_path {
        Some(p) => RolePrompts::from_path(p).with_context(|| format!("loading role prompts {}", p.display())),
        None => Ok(RolePrompts::shipped()),
    }
}

/// Opens the store described by `config` with an explicit backend.
pub fn open_state(
    config: &ServiceConfig,
    backend: Arc<dyn GenerationBackend>,
) -> anyhow::Result<Arc<AppState>> {
    let store = Store::open(StoreOptions {
        condition: config.condition,
        log_path: config.log_path(),
        lexicon: load_lexicon(config)?,
        prompts: load_prompts(config)?,
        backend,
    })?;
    let evaluator = Evaluator::shipped().with_constants(config.metrics.clone());
    Ok(Arc::new(AppState { store, evaluator }))
}

/// Binds `config.listen` and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let backend = build_backend(&config)?;
    let state = open_state(&config, backend)?;
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    tracing::info!(
        addr = %listener.local_addr()?,
        condition = %config.condition,
        backend = state.store.backend_name(),
        "listening"
    );
    axum::serve(listener, api::router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
