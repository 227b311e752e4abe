//! Live sessions materialized from the event log, and the message pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex as SessionLock;
use tracing::{info, warn};

use tutorbots_core::agents::{fallback_reply, generate_response, AgentError, GenerationBackend, RolePrompts};
use tutorbots_core::analytics::{EventKind, InteractionEvent, Page};
use tutorbots_core::domain::MonotonicClock;
use tutorbots_core::router::dispatch;
use tutorbots_core::{Author, BotRole, Condition, Message, RouterLexicon, RoutingDecision, Session, SessionId};

use crate::eventlog::{replay_state, Entry, EventLog, LogError, Payload};
use crate::scrub::scrub_pii;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session {0} not found")]
    NotFound(SessionId),
    #[error(transparent)]
    Invalid(#[from] tutorbots_core::Error),
    #[error("this deployment runs the {configured} condition, not {requested}")]
    ConditionMismatch {
        configured: Condition,
        requested: Condition,
    },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Result of one accepted student message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    /// The stored (scrubbed, classified) student message.
    pub inquiry: Message,
    pub routing: RoutingDecision,
    pub reply: Message,
}

pub struct StoreOptions {
    pub condition: Condition,
    pub log_path: PathBuf,
    pub lexicon: RouterLexicon,
    pub prompts: RolePrompts,
    pub backend: Arc<dyn GenerationBackend>,
}

pub struct Store {
    condition: Condition,
    log: EventLog,
    lexicon: RouterLexicon,
    prompts: Arc<RolePrompts>,
    backend: Arc<dyn GenerationBackend>,
    clock: MonotonicClock,
    sessions: RwLock<BTreeMap<SessionId, Arc<SessionLock<Session>>>>,
    clicks: Mutex<Vec<InteractionEvent>>,
    next_pseudonym: AtomicU64,
}

fn pseudonym_number(p: &str) -> Option<u64> {
    p.strip_prefix("p-")?.parse().ok()
}

impl Store {
    /// Opens the log and rebuilds every session from it.
    pub fn open(options: StoreOptions) -> Result<Store, ServiceError> {
        let (log, records) = EventLog::open(&options.log_path)?;
        let state = replay_state(&records)?;
        let last_ts = records.iter().map(|r| r.timestamp).max().unwrap_or(0);
        let next = state
            .sessions
            .values()
            .filter_map(|s| pseudonym_number(s.pseudonym()))
            .max()
            .map_or(1, |n| n + 1);
        info!(
            sessions = state.sessions.len(),
            records = records.len(),
            log = %log.path().display(),
            "replayed event log"
        );
        Ok(Store {
            condition: options.condition,
            log,
            lexicon: options.lexicon,
            prompts: Arc::new(options.prompts),
            backend: options.backend,
            clock: MonotonicClock::starting_at(last_ts),
            sessions: RwLock::new(
                state
                    .sessions
                    .into_iter()
                    .map(|(id, s)| (id, Arc::new(SessionLock::new(s))))
                    .collect(),
            ),
            clicks: Mutex::new(state.clicks),
            next_pseudonym: AtomicU64::new(next),
        })
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    fn handle(&self, id: &SessionId) -> Result<Arc<SessionLock<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.clone()))
    }

    /// Starts a session. A supplied pseudonym must not look like personal
    /// data; otherwise the next free `p-NNN` tag is used.
    pub fn create_session(
        &self,
        pseudonym: Option<&str>,
        condition: Option<Condition>,
    ) -> Result<Session, ServiceError> {
        if let Some(requested) = condition {
            if requested != self.condition {
                return Err(ServiceError::ConditionMismatch {
                    configured: self.condition,
                    requested,
                });
            }
        }
        let pseudonym = match pseudonym.map(str::trim) {
            Some(p) => {
                if p.is_empty() || p.len() > 64 {
                    return Err(tutorbots_core::Error::Validation(
                        "pseudonym must be 1 to 64 characters".into(),
                    )
                    .into());
                }
                if scrub_pii(p) != p {
                    return Err(tutorbots_core::Error::Validation(
                        "pseudonym must not contain personal data".into(),
                    )
                    .into());
                }
                p.to_owned()
            }
            None => format!("p-{:03}", self.next_pseudonym.fetch_add(1, Ordering::SeqCst)),
        };
        let session = Session::with_id(SessionId::generate(), &pseudonym, self.condition, self.clock.now())?;
        self.log.append(vec![Entry {
            timestamp: session.created_at(),
            pseudonym: pseudonym.clone(),
            payload: Payload::SessionStarted {
                session_id: session.id().clone(),
                condition: self.condition,
            },
        }])?;
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(session.id().clone(), Arc::new(SessionLock::new(session.clone())));
        Ok(session)
    }

    /// Classify, route, generate, log, then commit. Messages to one session
    /// are processed one at a time.
    pub async fn post_message(&self, id: &SessionId, text: &str) -> Result<Exchange, ServiceError> {
        let handle = self.handle(id)?;
        let mut session = handle.lock().await;

        let text = scrub_pii(text.trim());
        let (classification, routing) = dispatch(&text, session.condition(), &self.lexicon)?;
        let mut inquiry = Message::student(id.clone(), text, self.clock.now());
        inquiry.classification = Some(classification);

        let mut draft = session.clone();
        draft.append(inquiry.clone())?;
        draft.attach_routing(&inquiry.id, routing.clone())?;

        let role = routing.role;
        let backend = Arc::clone(&self.backend);
        let prompts = Arc::clone(&self.prompts);
        let routed = draft.messages().last().cloned().expect("inquiry just appended");
        let timestamp = inquiry.timestamp;
        let generated = tokio::task::spawn_blocking(move || {
            match generate_response(role, &draft, &routed, backend.as_ref(), &prompts, timestamp) {
                Err(AgentError::Transient(e)) => {
                    warn!(error = %e, %role, "backend unavailable; using fallback reply");
                    Ok(fallback_reply(role, &draft, &prompts, timestamp, e))
                }
                other => other,
            }
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
        .map_err(|e| match e {
            AgentError::Invalid(e) => ServiceError::Invalid(e),
            AgentError::Transient(e) => ServiceError::Internal(e.to_string()),
        })?;

        let mut reply = generated.message;
        reply.text = scrub_pii(&reply.text);
        reply.timestamp = self.clock.now().max(inquiry.timestamp);
        reply.validate()?;

        let pseudonym = session.pseudonym().to_owned();
        self.log.append(vec![
            Entry {
                timestamp: inquiry.timestamp,
                pseudonym: pseudonym.clone(),
                payload: Payload::Message {
                    message: inquiry.clone(),
                },
            },
            Entry {
                timestamp: inquiry.timestamp,
                pseudonym: pseudonym.clone(),
                payload: Payload::Routing {
                    session_id: id.clone(),
                    message_id: inquiry.id.clone(),
                    decision: routing.clone(),
                },
            },
            Entry {
                timestamp: reply.timestamp,
                pseudonym,
                payload: Payload::Message {
                    message: reply.clone(),
                },
            },
        ])?;

        session.append(inquiry.clone())?;
        session.attach_routing(&inquiry.id, routing.clone())?;
        session.append(reply.clone())?;
        let inquiry = session.messages()[session.len() - 2].clone();
        Ok(Exchange {
            inquiry,
            routing,
            reply,
        })
    }

    /// Logs a page click for the session's participant.
    pub async fn record_click(&self, id: &SessionId, page: Page) -> Result<InteractionEvent, ServiceError> {
        let handle = self.handle(id)?;
        let session = handle.lock().await;
        let kind = EventKind::PageClick { page };
        let timestamp = self.clock.now();
        self.log.append(vec![Entry {
            timestamp,
            pseudonym: session.pseudonym().to_owned(),
            payload: Payload::Interaction {
                session_id: id.clone(),
                kind,
            },
        }])?;
        let event = InteractionEvent {
            pseudonym: session.pseudonym().to_owned(),
            timestamp,
            kind,
        };
        self.clicks.lock().unwrap_or_else(|e| e.into_inner()).push(event.clone());
        Ok(event)
    }

    pub async fn transcript(&self, id: &SessionId) -> Result<Session, ServiceError> {
        Ok(self.handle(id)?.lock().await.clone())
    }

    /// Copies of every session, ordered by id.
    pub async fn snapshot(&self) -> BTreeMap<SessionId, Session> {
        let handles: Vec<(SessionId, Arc<SessionLock<Session>>)> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .map(|(k, v)| (k.clone(), Arc::clone(v)))
            .collect();
        let mut out = BTreeMap::new();
        for (id, h) in handles {
            out.insert(id, h.lock().await.clone());
        }
        out
    }

    /// Page clicks plus one `MessageSent` per student message.
    pub async fn interaction_events(&self) -> Vec<InteractionEvent> {
        let clicks = self.clicks.lock().unwrap_or_else(|e| e.into_inner()).clone();
        interaction_events(self.snapshot().await.values(), clicks)
    }
}

/// Merges page clicks with message events derived from transcripts. A student
/// message counts as sent to its routed role, or to the author of the next
/// bot reply when it was never routed (imported transcripts).
pub fn interaction_events<'a>(
    sessions: impl IntoIterator<Item = &'a Session>,
    clicks: Vec<InteractionEvent>,
) -> Vec<InteractionEvent> {
    let mut events = clicks;
    for session in sessions {
        let messages = session.messages();
        for (i, m) in messages.iter().enumerate() {
            if !m.author.is_student() {
                continue;
            }
            let role = m.routing.as_ref().map(|r| r.role).or_else(|| {
                messages[i + 1..].iter().find_map(|n| match n.author {
                    Author::Bot(role) => Some(role),
                    Author::Student => None,
                })
            });
            events.push(InteractionEvent {
                pseudonym: session.pseudonym().to_owned(),
                timestamp: m.timestamp,
                kind: EventKind::MessageSent {
                    role: role.unwrap_or(BotRole::Instructor),
                },
            });
        }
    }
    events
}
