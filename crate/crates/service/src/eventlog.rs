//! Append-only JSON-lines event log and replay.
//!
//! Every record carries a sequence number one greater than its predecessor,
//! starting at 1. Sessions, transcripts and page clicks are rebuilt from the
//! log alone.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tutorbots_core::analytics::{EventKind, InteractionEvent};
use tutorbots_core::{Condition, Message, MessageId, RoutingDecision, Session, SessionId, Timestamp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLogRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub pseudonym: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    /// `created_at` of the session is the record timestamp.
    SessionStarted {
        session_id: SessionId,
        condition: Condition,
    },
    Message {
        message: Message,
    },
    Routing {
        session_id: SessionId,
        message_id: MessageId,
        decision: RoutingDecision,
    },
    Interaction {
        session_id: SessionId,
        kind: EventKind,
    },
}

/// A record before it is numbered.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub timestamp: Timestamp,
    pub pseudonym: String,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log I/O: {0}")]
    Io(#[from] io::Error),
    #[error("event log line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event log corrupt at record {expected}: found sequence number {found}")]
    Corruption { expected: u64, found: u64 },
    #[error("event log record {seq}: {source}")]
    Invalid {
        seq: u64,
        #[source]
        source: tutorbots_core::Error,
    },
}

/// Parses a log, checking that sequence numbers run 1, 2, 3, ... without
/// gaps. Blank lines are ignored.
pub fn read_log(reader: impl BufRead) -> Result<Vec<EventLogRecord>, LogError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EventLogRecord = serde_json::from_str(&line).map_err(|e| LogError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let expected = records.len() as u64 + 1;
        if record.seq != expected {
            return Err(LogError::Corruption {
                expected,
                found: record.seq,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_log_file(path: &Path) -> Result<Vec<EventLogRecord>, LogError> {
    match File::open(path) {
        Ok(f) => read_log(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

/// State rebuilt from a log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replayed {
    pub sessions: BTreeMap<SessionId, Session>,
    /// Page clicks in log order.
    pub clicks: Vec<InteractionEvent>,
}

impl Replayed {
    /// Applies one record. Records are validated exactly as the live store
    /// validates them.
    pub fn apply(&mut self, record: &EventLogRecord) -> Result<(), LogError> {
        let invalid = |source| LogError::Invalid {
            seq: record.seq,
            source,
        };
        match &record.payload {
            Payload::SessionStarted {
                session_id,
                condition,
            } => {
                if self.sessions.contains_key(session_id) {
                    return Err(invalid(tutorbots_core::Error::Validation(format!(
                        "session {session_id} started twice"
                    ))));
                }
                let session = Session::with_id(
                    session_id.clone(),
                    &record.pseudonym,
                    *condition,
                    record.timestamp,
                )
                .map_err(invalid)?;
                self.sessions.insert(session_id.clone(), session);
            }
            Payload::Message { message } => {
                self.session_mut(&message.session_id)
                    .map_err(invalid)?
                    .append(message.clone())
                    .map_err(invalid)?;
            }
            Payload::Routing {
                session_id,
                message_id,
                decision,
            } => {
                self.session_mut(session_id)
                    .map_err(invalid)?
                    .attach_routing(message_id, decision.clone())
                    .map_err(invalid)?;
            }
            Payload::Interaction { session_id, kind } => {
                self.session_mut(session_id).map_err(invalid)?;
                self.clicks.push(InteractionEvent {
                    pseudonym: record.pseudonym.clone(),
                    timestamp: record.timestamp,
                    kind: *kind,
                });
            }
        }
        Ok(())
    }

    fn session_mut(&mut self, id: &SessionId) -> Result<&mut Session, tutorbots_core::Error> {
        self.sessions
            .get_mut(id)
            .ok_or_else(|| tutorbots_core::Error::Validation(format!("unknown session {id}")))
    }
}

/// Rebuilds every session and click from `records`.
pub fn replay_state(records: &[EventLogRecord]) -> Result<Replayed, LogError> {
    let mut state = Replayed::default();
    for (i, record) in records.iter().enumerate() {
        let expected = i as u64 + 1;
        if record.seq != expected {
            return Err(LogError::Corruption {
                expected,
                found: record.seq,
            });
        }
        state.apply(record)?;
    }
    Ok(state)
}

/// Session transcripts reconstructed from `records`.
pub fn replay_log(records: &[EventLogRecord]) -> Result<BTreeMap<SessionId, Session>, LogError> {
    replay_state(records).map(|s| s.sessions)
}

struct Writer {
    file: File,
    next_seq: u64,
}

/// The single writer of a log file. Appends are serialized and each batch
/// is written and flushed with one call.
pub struct EventLog {
    path: PathBuf,
    writer: Mutex<Writer>,
}

impl EventLog {
    /// Opens (creating if needed) the log at `path` and returns the existing
    /// records alongside the writer.
    pub fn open(path: impl Into<PathBuf>) -> Result<(EventLog, Vec<EventLogRecord>), LogError> {
        let path = path.into();
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let records = read_log_file(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let log = EventLog {
            path,
            writer: Mutex::new(Writer {
                file,
                next_seq: records.len() as u64 + 1,
            }),
        };
        Ok((log, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Numbers and appends `entries` as one contiguous batch.
    pub fn append(&self, entries: Vec<Entry>) -> Result<Vec<EventLogRecord>, LogError> {
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut buf = Vec::new();
        let mut records = Vec::with_capacity(entries.len());
        for (i, entry) in entries.into_iter().enumerate() {
            let record = EventLogRecord {
                seq: w.next_seq + i as u64,
                timestamp: entry.timestamp,
                pseudonym: entry.pseudonym,
                payload: entry.payload,
            };
            serde_json::to_writer(&mut buf, &record).map_err(io::Error::from)?;
            buf.push(b'\n');
            records.push(record);
        }
        w.file.write_all(&buf)?;
        w.file.flush()?;
        w.next_seq += records.len() as u64;
        Ok(records)
    }
}
