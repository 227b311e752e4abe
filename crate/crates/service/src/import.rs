//! Import of transcripts produced outside the service (for example with a
//! human tutor) into the event log.
//!
//! Input is JSON lines, one transcript per line:
//!
//! ```json
//! {"pseudonym":"h-001","condition":"single_bot","messages":[
//!   {"author":"student","text":"...","timestamp":1000},
//!   {"author":"instructor","text":"...","timestamp":2000}]}
//! ```
//!
//! Text is scrubbed on the way in. Imported student messages carry no
//! classification or routing decision.

use serde::Deserialize;
use thiserror::Error;

use tutorbots_core::{Author, Condition, Message, Session, SessionId, Timestamp};

use crate::eventlog::{replay_state, Entry, EventLog, EventLogRecord, LogError, Payload};
use crate::scrub::scrub_pii;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportedMessage {
    author: Author,
    text: String,
    timestamp: Timestamp,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImportedTranscript {
    pseudonym: String,
    condition: Condition,
    messages: Vec<ImportedMessage>,
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("transcript line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Log(#[from] LogError),
}

/// Parses and validates every transcript, then returns the log entries that
/// recreate them. Nothing is written when any line is bad.
pub fn import_entries(raw: &str) -> Result<Vec<Entry>, ImportError> {
    let mut entries = Vec::new();
    for (i, l) in raw.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let bad = |message: String| ImportError::Line { line, message };
        let t: ImportedTranscript = serde_json::from_str(l).map_err(|e| bad(e.to_string()))?;
        let pseudonym = t.pseudonym.trim().to_owned();
        if scrub_pii(&pseudonym) != pseudonym {
            return Err(bad("pseudonym must not contain personal data".into()));
        }
        let created_at = t.messages.iter().map(|m| m.timestamp).min().unwrap_or(0);
        let mut session = Session::with_id(SessionId::generate(), &pseudonym, t.condition, created_at)
            .map_err(|e| bad(e.to_string()))?;
        entries.push(Entry {
            timestamp: created_at,
            pseudonym: pseudonym.clone(),
            payload: Payload::SessionStarted {
                session_id: session.id().clone(),
                condition: t.condition,
            },
        });
        for m in t.messages {
            let text = scrub_pii(&m.text);
            let message = match m.author {
                Author::Student => Message::student(session.id().clone(), text, m.timestamp),
                Author::Bot(role) => Message::bot(session.id().clone(), role, text, m.timestamp),
            };
            session.append(message.clone()).map_err(|e| bad(e.to_string()))?;
            entries.push(Entry {
                timestamp: m.timestamp,
                pseudonym: pseudonym.clone(),
                payload: Payload::Message { message },
            });
        }
    }
    Ok(entries)
}

/// Appends the transcripts in `raw` to `log`, checked against the state
/// already in the log.
pub fn import_transcripts(
    log: &EventLog,
    existing: &[EventLogRecord],
    raw: &str,
) -> Result<Vec<EventLogRecord>, ImportError> {
    let entries = import_entries(raw)?;
    let mut state = replay_state(existing)?;
    for (seq, e) in (existing.len() as u64 + 1..).zip(&entries) {
        state.apply(&EventLogRecord {
            seq,
            timestamp: e.timestamp,
            pseudonym: e.pseudonym.clone(),
            payload: e.payload.clone(),
        })?;
    }
    Ok(log.append(entries)?)
}
