mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::{open_store, open_store_with};
use tutorbots_core::agents::{
    truncate_tokens, BackendError, GenerationBackend, GenerationRequest, RolePrompts, StubBackend,
    DEFAULT_MAX_TOKENS,
};
use tutorbots_core::analytics::{EventKind, Page};
use tutorbots_core::{Author, BloomLevel, BotRole, Condition, SessionId};
use tutorbots_service::eventlog::{read_log_file, replay_log, Payload};
use tutorbots_service::ServiceError;

#[tokio::test]
async fn anxious_student_gets_the_emotional_stub_reply() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::MultiRole);
    let s = store.create_session(None, None).unwrap();
    let ex = store.post_message(s.id(), "I'm anxious about failing").await.unwrap();
    assert_eq!(ex.routing.role, BotRole::EmotionalSupporter);
    assert_eq!(ex.reply.author, Author::Bot(BotRole::EmotionalSupporter));
    let expected = StubBackend::shipped().render(
        BotRole::EmotionalSupporter,
        BloomLevel::Remember,
        "I'm anxious about failing",
    );
    assert_eq!(ex.reply.text, truncate_tokens(&expected, DEFAULT_MAX_TOKENS));
    assert!(!ex.reply.degraded);
    assert_eq!(ex.inquiry.routing.as_ref(), Some(&ex.routing));
}

#[tokio::test]
async fn reply_author_always_equals_routed_role() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::MultiRole);
    let s = store.create_session(Some("p-777"), Some(Condition::MultiRole)).unwrap();
    for text in [
        "How do I implement a queue?",
        "Anyone want to form a study group?",
        "What salary can a data scientist expect?",
        "I'm so stressed",
        "@career what jobs use SQL?",
        "hello there",
    ] {
        let ex = store.post_message(s.id(), text).await.unwrap();
        assert_eq!(ex.reply.author, Author::Bot(ex.routing.role), "{text}");
    }
    assert_eq!(store.transcript(s.id()).await.unwrap().len(), 12);
}

#[tokio::test]
async fn errors_for_unknown_sessions_and_empty_text() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::MultiRole);
    let missing = SessionId::new("nope");
    assert!(matches!(
        store.post_message(&missing, "hi").await,
        Err(ServiceError::NotFound(_))
    ));
    let s = store.create_session(None, None).unwrap();
    assert!(matches!(
        store.post_message(s.id(), "   ").await,
        Err(ServiceError::Invalid(_))
    ));
    assert!(matches!(
        store.create_session(None, Some(Condition::SingleBot)),
        Err(ServiceError::ConditionMismatch { .. })
    ));
    assert!(store.create_session(Some("jane@uni.edu"), None).is_err());
    // nothing but the session start reached the log
    assert_eq!(read_log_file(&dir.path().join("events.jsonl")).unwrap().len(), 1);
}

#[tokio::test]
async fn generated_pseudonyms_continue_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    {
        let store = open_store(dir.path(), Condition::SingleBot);
        assert_eq!(store.create_session(None, None).unwrap().pseudonym(), "p-001");
        assert_eq!(store.create_session(None, None).unwrap().pseudonym(), "p-002");
    }
    let store = open_store(dir.path(), Condition::SingleBot);
    assert_eq!(store.create_session(None, None).unwrap().pseudonym(), "p-003");
    assert_eq!(store.snapshot().await.len(), 3);
}

struct Failing {
    error: BackendError,
    calls: AtomicUsize,
}

impl GenerationBackend for Failing {
    fn name(&self) -> &str {
        "failing"
    }

    fn complete(&self, _: &GenerationRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Err(self.error.clone())
    }
}

#[tokio::test]
async fn backend_failures_produce_flagged_fallbacks() {
    for error in [
        BackendError::Timeout(Duration::from_secs(30)),
        BackendError::Transient("503".into()),
        BackendError::Refused("policy".into()),
        BackendError::Empty,
    ] {
        let dir = tempfile::tempdir().unwrap();
        let backend = Arc::new(Failing {
            error,
            calls: AtomicUsize::new(0),
        });
        let store = open_store_with(dir.path(), Condition::MultiRole, backend.clone());
        let s = store.create_session(None, None).unwrap();
        let ex = store.post_message(s.id(), "I'm stressed").await.unwrap();
        assert!(ex.reply.degraded);
        assert_eq!(ex.reply.text, RolePrompts::shipped().get(BotRole::EmotionalSupporter).fallback);
        assert_eq!(backend.calls.load(Ordering::SeqCst), 1);
        let json = serde_json::to_value(&ex.reply).unwrap();
        assert_eq!(json["degraded"], true);
    }
}

#[tokio::test]
async fn pii_never_reaches_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::MultiRole);
    let s = store.create_session(None, None).unwrap();
    let ex = store
        .post_message(s.id(), "I'm stressed, call me on 555-123-4567 or mail a.b@uni.de")
        .await
        .unwrap();
    assert_eq!(ex.inquiry.text, "I'm stressed, call me on [PHONE] or mail [EMAIL]");
    let raw = std::fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    assert!(!raw.contains("a.b@uni.de"));
    assert!(!raw.contains("4567"));
}

#[tokio::test]
async fn log_holds_message_routing_reply_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::MultiRole);
    let s = store.create_session(None, None).unwrap();
    store.record_click(s.id(), Page::ChatbotPage).await.unwrap();
    let ex = store.post_message(s.id(), "Explain recursion").await.unwrap();
    let records = read_log_file(&dir.path().join("events.jsonl")).unwrap();
    let kinds: Vec<&str> = records
        .iter()
        .map(|r| match &r.payload {
            Payload::SessionStarted { .. } => "start",
            Payload::Message { .. } => "message",
            Payload::Routing { .. } => "routing",
            Payload::Interaction { .. } => "click",
        })
        .collect();
    assert_eq!(kinds, ["start", "click", "message", "routing", "message"]);
    let Payload::Message { message } = &records[2].payload else { unreachable!() };
    assert!(message.routing.is_none(), "routing travels in its own record");
    assert!(message.classification.is_some());

    let replayed = replay_log(&records).unwrap();
    assert_eq!(replayed[s.id()], store.transcript(s.id()).await.unwrap());
    assert_eq!(replayed[s.id()].messages()[1], ex.reply);

    let events = store.interaction_events().await;
    assert_eq!(events.len(), 2);
    assert!(events.iter().any(|e| e.kind == EventKind::MessageSent { role: BotRole::Instructor }));
}

#[tokio::test]
async fn single_bot_condition_routes_to_instructor_unless_addressed() {
    let dir = tempfile::tempdir().unwrap();
    let store = open_store(dir.path(), Condition::SingleBot);
    let s = store.create_session(None, None).unwrap();
    let ex = store.post_message(s.id(), "I'm anxious about my career").await.unwrap();
    assert_eq!(ex.routing.role, BotRole::Instructor);
    assert!(!ex.routing.overridden);
    let ex = store.post_message(s.id(), "@peer anyone around?").await.unwrap();
    assert_eq!(ex.routing.role, BotRole::Peer);
    assert!(ex.routing.overridden);
}
