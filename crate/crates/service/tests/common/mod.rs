#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use tutorbots_core::agents::{GenerationBackend, RolePrompts, StubBackend};
use tutorbots_core::{Condition, RouterLexicon};
use tutorbots_service::store::{Store, StoreOptions};

pub fn open_store(dir: &Path, condition: Condition) -> Store {
    open_store_with(dir, condition, Arc::new(StubBackend::shipped()))
}

pub fn open_store_with(dir: &Path, condition: Condition, backend: Arc<dyn GenerationBackend>) -> Store {
    Store::open(StoreOptions {
        condition,
        log_path: dir.join("events.jsonl"),
        lexicon: RouterLexicon::shipped(),
        prompts: RolePrompts::shipped(),
        backend,
    })
    .unwrap()
}
