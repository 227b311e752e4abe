//! Shared vocabulary: bot roles, Bloom levels, messages and sessions.
//!
//! A [`Session`] is one student's merged transcript. Every message carries its
//! author, so the bot that answered is visible per message rather than per
//! thread.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::router::RoutingDecision;

/// Milliseconds since the Unix epoch.
pub type Timestamp = u64;

pub fn now_millis() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as Timestamp)
        .unwrap_or(0)
}

/// The four pedagogical agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BotRole {
    #[serde(rename = "instructor")]
    Instructor,
    #[serde(rename = "peer")]
    Peer,
    #[serde(rename = "career")]
    CareerAdvisor,
    #[serde(rename = "emotional")]
    EmotionalSupporter,
}

impl BotRole {
    pub const ALL: [BotRole; 4] = [
        BotRole::Instructor,
        BotRole::Peer,
        BotRole::CareerAdvisor,
        BotRole::EmotionalSupporter,
    ];

    /// Stable wire name.
    pub fn as_str(self) -> &'static str {
        match self {
            BotRole::Instructor => "instructor",
            BotRole::Peer => "peer",
            BotRole::CareerAdvisor => "career",
            BotRole::EmotionalSupporter => "emotional",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            BotRole::Instructor => "Instructor Bot",
            BotRole::Peer => "Peer Bot",
            BotRole::CareerAdvisor => "Career Advising Bot",
            BotRole::EmotionalSupporter => "Emotional Supporter Bot",
        }
    }

    /// The role that serves inquiries of the given category.
    pub fn for_category(category: Category) -> BotRole {
        match category {
            Category::Academic => BotRole::Instructor,
            Category::Social => BotRole::Peer,
            Category::Career => BotRole::CareerAdvisor,
            Category::Emotional => BotRole::EmotionalSupporter,
        }
    }
}

impl fmt::Display for BotRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BotRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BotRole::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown bot role {s:?}")))
    }
}

/// Cognitive level of a question. Ordinals run 1..=6 and the derived `Ord`
/// follows them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BloomLevel {
    Remember = 1,
    Understand = 2,
    Apply = 3,
    Analyze = 4,
    Evaluate = 5,
    Create = 6,
}

impl BloomLevel {
    pub const ALL: [BloomLevel; 6] = [
        BloomLevel::Remember,
        BloomLevel::Understand,
        BloomLevel::Apply,
        BloomLevel::Analyze,
        BloomLevel::Evaluate,
        BloomLevel::Create,
    ];

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(n: u8) -> Result<Self> {
        BloomLevel::ALL
            .get((n as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::validation(format!("bloom level must be 1..=6, got {n}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            BloomLevel::Remember => "remember",
            BloomLevel::Understand => "understand",
            BloomLevel::Apply => "apply",
            BloomLevel::Analyze => "analyze",
            BloomLevel::Evaluate => "evaluate",
            BloomLevel::Create => "create",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        BloomLevel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown bloom level {s:?}")))
    }
}

impl fmt::Display for BloomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for BloomLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.ordinal())
    }
}

impl<'de> Deserialize<'de> for BloomLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        BloomLevel::from_ordinal(n).map_err(serde::de::Error::custom)
    }
}

/// Inquiry category as detected by the router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Academic,
    Social,
    Career,
    Emotional,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Academic,
        Category::Social,
        Category::Career,
        Category::Emotional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Academic => "academic",
            Category::Social => "social",
            Category::Career => "career",
            Category::Emotional => "emotional",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Experimental arm a session belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    SingleBot,
    MultiRole,
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single_bot" | "single-bot" | "singlebot" => Ok(Condition::SingleBot),
            "multi_role" | "multi-role" | "multirole" => Ok(Condition::MultiRole),
            other => Err(Error::validation(format!("unknown condition {other:?}"))),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::SingleBot => "single_bot",
            Condition::MultiRole => "multi_role",
        })
    }
}

/// Who wrote a message. Serialized as `"student"` or the bot's role name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Author {
    Student,
    Bot(BotRole),
}

impl Author {
    pub fn as_str(self) -> &'static str {
        match self {
            Author::Student => "student",
            Author::Bot(role) => role.as_str(),
        }
    }

    pub fn is_student(self) -> bool {
        matches!(self, Author::Student)
    }
}

impl fmt::Display for Author {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Author {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "student" {
            Ok(Author::Student)
        } else {
            s.parse().map(Author::Bot)
        }
    }
}

impl Serialize for Author {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Author {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn generate() -> Self {
                Self(uuid::Uuid::new_v4().to_string())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(SessionId);
string_id!(MessageId);

/// Router output attached to a student message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InquiryClassification {
    pub category: Category,
    pub bloom: BloomLevel,
    pub complexity: f64,
    pub matched_terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub session_id: SessionId,
    pub author: Author,
    pub text: String,
    pub timestamp: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<InquiryClassification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingDecision>,
    /// Set on bot replies produced by the fallback template.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degraded: bool,
}

impl Message {
    pub fn student(session_id: SessionId, text: impl Into<String>, timestamp: Timestamp) -> Self {
        Message {
            id: MessageId::generate(),
            session_id,
            author: Author::Student,
            text: text.into(),
            timestamp,
            classification: None,
            routing: None,
            degraded: false,
        }
    }

    pub fn bot(
        session_id: SessionId,
        role: BotRole,
        text: impl Into<String>,
        timestamp: Timestamp,
    ) -> Self {
        Message {
            id: MessageId::generate(),
            session_id,
            author: Author::Bot(role),
            text: text.into(),
            timestamp,
            classification: None,
            routing: None,
            degraded: false,
        }
    }

    /// Checks the per-message invariants (non-empty text, router fields only
    /// on student messages, bounded scores).
    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::validation("message text is empty"));
        }
        if !self.author.is_student() {
            if self.classification.is_some() || self.routing.is_some() {
                return Err(Error::validation(
                    "bot messages cannot carry a classification or routing decision",
                ));
            }
        } else if self.degraded {
            return Err(Error::validation("student messages cannot be degraded"));
        }
        if let Some(c) = &self.classification {
            if !(0.0..=1.0).contains(&c.complexity) {
                return Err(Error::validation(format!(
                    "complexity {} outside [0, 1]",
                    c.complexity
                )));
            }
        }
        if let Some(r) = &self.routing {
            r.validate()?;
        }
        Ok(())
    }
}

/// One participant's conversation. Fields are private so the ordering and
/// condition invariants can only change through [`Session::append`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SessionRepr")]
pub struct Session {
    id: SessionId,
    pseudonym: String,
    condition: Condition,
    created_at: Timestamp,
    messages: Vec<Message>,
}

#[derive(Deserialize)]
struct SessionRepr {
    id: SessionId,
    pseudonym: String,
    condition: Condition,
    created_at: Timestamp,
    messages: Vec<Message>,
}

impl TryFrom<SessionRepr> for Session {
    type Error = Error;

    fn try_from(repr: SessionRepr) -> Result<Self> {
        let mut session = Session::with_id(repr.id, &repr.pseudonym, repr.condition, repr.created_at)?;
        for msg in repr.messages {
            session.append(msg)?;
        }
        Ok(session)
    }
}

impl Session {
    /// Creates an empty session with a fresh id, stamped with the wall clock.
    pub fn new(pseudonym: &str, condition: Condition) -> Result<Self> {
        Session::with_id(SessionId::generate(), pseudonym, condition, now_millis())
    }

    pub fn with_id(
        id: SessionId,
        pseudonym: &str,
        condition: Condition,
        created_at: Timestamp,
    ) -> Result<Self> {
        if pseudonym.trim().is_empty() {
            return Err(Error::validation("pseudonym must not be empty"));
        }
        if id.as_str().is_empty() {
            return Err(Error::validation("session id must not be empty"));
        }
        Ok(Session {
            id,
            pseudonym: pseudonym.to_owned(),
            condition,
            created_at,
            messages: Vec::new(),
        })
    }

    pub fn id(&self) -> &SessionId {
        &self.id
    }

    pub fn pseudonym(&self) -> &str {
        &self.pseudonym
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn created_at(&self) -> Timestamp {
        self.created_at
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn last_timestamp(&self) -> Option<Timestamp> {
        self.messages.last().map(|m| m.timestamp)
    }

    pub fn position_of(&self, id: &MessageId) -> Option<usize> {
        self.messages.iter().position(|m| &m.id == id)
    }

    /// Records the routing decision for a student message that has none yet.
    pub fn attach_routing(&mut self, id: &MessageId, decision: RoutingDecision) -> Result<()> {
        decision.validate()?;
        let msg = self
            .messages
            .iter_mut()
            .find(|m| &m.id == id)
            .ok_or_else(|| Error::validation(format!("no message {id} in session {}", self.id)))?;
        if !msg.author.is_student() {
            return Err(Error::validation("only student messages are routed"));
        }
        if msg.routing.is_some() {
            return Err(Error::validation(format!("message {id} is already routed")));
        }
        msg.routing = Some(decision);
        Ok(())
    }

    /// Appends a message, enforcing session identity, timestamp order and the
    /// per-message invariants.
    pub fn append(&mut self, msg: Message) -> Result<()> {
        if msg.session_id != self.id {
            return Err(Error::SessionMismatch {
                expected: self.id.to_string(),
                found: msg.session_id.to_string(),
            });
        }
        if let Some(last) = self.last_timestamp() {
            if msg.timestamp < last {
                return Err(Error::TimestampRegression {
                    last,
                    found: msg.timestamp,
                });
            }
        }
        msg.validate()?;
        if self.position_of(&msg.id).is_some() {
            return Err(Error::validation(format!("duplicate message id {}", msg.id)));
        }
        self.messages.push(msg);
        Ok(())
    }
}

/// Creates a session (constructor form used by the service layer).
pub fn make_session(pseudonym: &str, condition: Condition) -> Result<Session> {
    Session::new(pseudonym, condition)
}

/// Returns the session with `msg` appended.
pub fn append_message(mut session: Session, msg: Message) -> Result<Session> {
    session.append(msg)?;
    Ok(session)
}

/// Monotonic millisecond clock: never returns a value lower than one it has
/// already handed out.
#[derive(Debug, Default)]
pub struct MonotonicClock {
    last: AtomicU64,
}

impl MonotonicClock {
    pub fn new() -> Self {
        Self::default()
    }

    /// A clock that starts counting from `start` (useful for replayed state).
    pub fn starting_at(start: Timestamp) -> Self {
        MonotonicClock {
            last: AtomicU64::new(start),
        }
    }

    pub fn now(&self) -> Timestamp {
        let wall = now_millis();
        let prev = self.last.fetch_max(wall, Ordering::SeqCst);
        prev.max(wall)
    }
}
