//! The four role agents: role-conditioned prompts over a pluggable
//! [`GenerationBackend`].

mod backend;
mod stub;

pub use backend::{truncate_tokens, BackendError, GenerationBackend, GenerationRequest};
pub use stub::{
    parse_qa_jsonl, shipped_reference_corpus, StubBackend, StubTemplates, RETRIEVAL_THRESHOLD,
};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{BloomLevel, BotRole, Message, Session, Timestamp};
use crate::error::Error;

const SHIPPED_ROLES: &str = include_str!("../../data/roles.toml");

/// Default reply length cap, in tokens.
pub const DEFAULT_MAX_TOKENS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolePrompt {
    #[serde(skip_deserializing, default = "placeholder_role")]
    pub role: BotRole,
    pub system_preamble: String,
    #[serde(default)]
    pub style_directives: Vec<String>,
    pub context_window: usize,
    pub fallback: String,
}

fn placeholder_role() -> BotRole {
    BotRole::Instructor
}

/// Prompts for all four roles.
#[derive(Debug, Clone)]
pub struct RolePrompts {
    prompts: BTreeMap<BotRole, RolePrompt>,
}

impl RolePrompts {
    pub fn shipped() -> RolePrompts {
        RolePrompts::from_toml_str(SHIPPED_ROLES).expect("shipped role prompts are valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<RolePrompts, Error> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })?;
        RolePrompts::from_toml_str(&raw)
    }

    pub fn from_toml_str(raw: &str) -> Result<RolePrompts, Error> {
        let parsed: BTreeMap<String, RolePrompt> = toml::from_str(raw).map_err(|e| Error::Parse {
            source_name: "role prompts".into(),
            message: e.to_string(),
        })?;
        let mut prompts = BTreeMap::new();
        for (name, mut prompt) in parsed {
            let role: BotRole = name.parse()?;
            if prompt.system_preamble.trim().is_empty() {
                return Err(Error::Validation(format!("{role} preamble is empty")));
            }
            if prompt.fallback.trim().is_empty() {
                return Err(Error::Validation(format!("{role} fallback is empty")));
            }
            prompt.role = role;
            prompts.insert(role, prompt);
        }
        if let Some(missing) = BotRole::ALL.iter().find(|r| !prompts.contains_key(r)) {
            return Err(Error::Validation(format!("no prompt for {missing}")));
        }
        Ok(RolePrompts { prompts })
    }

    pub fn get(&self, role: BotRole) -> &RolePrompt {
        &self.prompts[&role]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error(transparent)]
    Invalid(#[from] Error),
    /// The backend timed out or failed transiently; the caller may retry.
    #[error("generation failed transiently: {0}")]
    Transient(BackendError),
}

fn render_line(msg: &Message) -> String {
    format!("{}: {}", msg.author, msg.text.trim())
}

/// Builds the prompt for `inquiry`: preamble, directives, then up to
/// `context_window` prior messages and the inquiry as `author: text` lines.
/// When the result exceeds `max_chars`, the oldest context lines are dropped
/// first; the inquiry line is always kept.
pub fn build_prompt(
    prompt: &RolePrompt,
    session: &Session,
    inquiry: &Message,
    max_chars: usize,
) -> Result<String, Error> {
    let position = session
        .position_of(&inquiry.id)
        .ok_or_else(|| Error::Validation(format!("message {} is not in session {}", inquiry.id, session.id())))?;
    if !inquiry.author.is_student() {
        return Err(Error::Validation("inquiry must be a student message".into()));
    }

    let mut header = prompt.system_preamble.trim().to_owned();
    for directive in &prompt.style_directives {
        header.push_str("\n- ");
        header.push_str(directive.trim());
    }
    header.push_str("\n\nConversation:\n");

    let prior = &session.messages()[..position];
    let start = prior.len().saturating_sub(prompt.context_window);
    let mut context: Vec<String> = prior[start..].iter().map(render_line).collect();
    let last = render_line(inquiry);

    let size = |ctx: &[String]| header.len() + ctx.iter().map(|l| l.len() + 1).sum::<usize>() + last.len();
    while !context.is_empty() && size(&context) > max_chars {
        context.remove(0);
    }

    let mut out = header;
    for line in context {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&last);
    Ok(out)
}

/// A generated reply. `message.degraded` is set when the fallback text was
/// used.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub message: Message,
    pub error: Option<BackendError>,
}

/// Produces `role`'s reply to `inquiry`. Refusals and empty output fall back
/// to the role's template reply; timeouts and transient failures are returned
/// to the caller.
pub fn generate_response(
    role: BotRole,
    session: &Session,
    inquiry: &Message,
    backend: &dyn GenerationBackend,
    prompts: &RolePrompts,
    timestamp: Timestamp,
) -> Result<Generated, AgentError> {
    let role_prompt = prompts.get(role);
    let prompt = build_prompt(role_prompt, session, inquiry, backend.max_prompt_chars())?;
    let bloom = inquiry
        .classification
        .as_ref()
        .map(|c| c.bloom)
        .unwrap_or(BloomLevel::Remember);
    let request = GenerationRequest {
        role,
        bloom,
        inquiry: inquiry.text.clone(),
        system_preamble: role_prompt.system_preamble.clone(),
        prompt,
        max_tokens: DEFAULT_MAX_TOKENS,
    };
    let timestamp = timestamp.max(inquiry.timestamp);
    let outcome = match backend.complete(&request) {
        Ok(text) if !text.trim().is_empty() => Ok(text),
        Ok(_) => Err(BackendError::Empty),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(text) => Ok(Generated {
            message: Message::bot(session.id().clone(), role, text, timestamp),
            error: None,
        }),
        Err(e) if e.is_retryable() => Err(AgentError::Transient(e)),
        Err(e) => Ok(fallback_reply(role, session, prompts, timestamp, e)),
    }
}

/// The degraded template reply for `role`.
pub fn fallback_reply(
    role: BotRole,
    session: &Session,
    prompts: &RolePrompts,
    timestamp: Timestamp,
    cause: BackendError,
) -> Generated {
    let mut message = Message::bot(
        session.id().clone(),
        role,
        prompts.get(role).fallback.clone(),
        timestamp,
    );
    message.degraded = true;
    Generated {
        message,
        error: Some(cause),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Condition, InquiryClassification, Category};
    use std::time::{Duration, Instant};

    struct Fixed(Result<String, BackendError>);

    impl GenerationBackend for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn complete(&self, _: &GenerationRequest) -> Result<String, BackendError> {
            self.0.clone()
        }
    }

    fn session_with(history: &[&str], inquiry: &str) -> (Session, Message) {
        let mut s = Session::with_id("s-1".into(), "p-001", Condition::MultiRole, 0).unwrap();
        for (i, text) in history.iter().enumerate() {
            let msg = if i % 2 == 0 {
                Message::student("s-1".into(), *text, i as u64)
            } else {
                Message::bot("s-1".into(), BotRole::Instructor, *text, i as u64)
            };
            s.append(msg).unwrap();
        }
        let mut msg = Message::student("s-1".into(), inquiry, 100);
        msg.classification = Some(InquiryClassification {
            category: Category::Academic,
            bloom: BloomLevel::Remember,
            complexity: 0.1,
            matched_terms: vec![],
        });
        s.append(msg.clone()).unwrap();
        (s, msg)
    }

    fn transcript_lines(prompt: &str) -> Vec<&str> {
        prompt
            .split("Conversation:\n")
            .nth(1)
            .unwrap()
            .lines()
            .collect()
    }

    #[test]
    fn empty_history_gives_one_line() {
        let prompts = RolePrompts::shipped();
        let (s, m) = session_with(&[], "What is a variable?");
        let p = build_prompt(prompts.get(BotRole::Instructor), &s, &m, 16_000).unwrap();
        assert!(p.starts_with(&prompts.get(BotRole::Instructor).system_preamble));
        assert_eq!(transcript_lines(&p), ["student: What is a variable?"]);
    }

    #[test]
    fn context_window_limits_history() {
        let mut prompt = RolePrompts::shipped().get(BotRole::Peer).clone();
        prompt.context_window = 2;
        let (s, m) = session_with(&["a", "b", "c", "d", "e"], "f");
        let p = build_prompt(&prompt, &s, &m, 16_000).unwrap();
        assert_eq!(transcript_lines(&p), ["instructor: d", "student: e", "student: f"]);
    }

    #[test]
    fn truncation_never_drops_the_inquiry() {
        let prompt = RolePrompts::shipped().get(BotRole::Instructor).clone();
        let long = "x".repeat(500);
        let (s, m) = session_with(&[&long, &long, &long], "the question");
        let p = build_prompt(&prompt, &s, &m, 10).unwrap();
        assert_eq!(transcript_lines(&p), ["student: the question"]);
        let full = build_prompt(&prompt, &s, &m, usize::MAX).unwrap();
        assert_eq!(transcript_lines(&full).len(), 4);
        // room for exactly one context line
        let p = build_prompt(&prompt, &s, &m, full.len() - 2 * (long.len() + 10)).unwrap();
        assert_eq!(transcript_lines(&p).len(), 2);
    }

    #[test]
    fn emotional_preamble_mentions_motivation() {
        let prompts = RolePrompts::shipped();
        let p = prompts.get(BotRole::EmotionalSupporter);
        assert!(p.system_preamble.contains("encouragement and motivation"));
        assert!(p.style_directives.iter().any(|d| d.contains("motivational support")));
    }

    #[test]
    fn inquiry_outside_session_is_rejected() {
        let prompts = RolePrompts::shipped();
        let (s, _) = session_with(&[], "hi");
        let stranger = Message::student("s-1".into(), "lost", 1);
        assert!(build_prompt(prompts.get(BotRole::Peer), &s, &stranger, 1000).is_err());
    }

    #[test]
    fn bot_message_is_not_an_inquiry() {
        let prompts = RolePrompts::shipped();
        let (s, _) = session_with(&["q", "answer"], "next");
        let bot = s.messages()[1].clone();
        assert!(build_prompt(prompts.get(BotRole::Peer), &s, &bot, 1000).is_err());
    }

    #[test]
    fn stub_generation_uses_template_and_role() {
        let prompts = RolePrompts::shipped();
        let stub = StubBackend::shipped();
        let (s, m) = session_with(&[], "What is a variable?");
        let g = generate_response(BotRole::Instructor, &s, &m, &stub, &prompts, 5).unwrap();
        assert_eq!(g.message.author, crate::domain::Author::Bot(BotRole::Instructor));
        assert_eq!(g.message.text, stub.render(BotRole::Instructor, BloomLevel::Remember, "What is a variable?"));
        assert!(g.message.timestamp >= m.timestamp);
        assert!(!g.message.degraded);
        let again = generate_response(BotRole::Instructor, &s, &m, &stub, &prompts, 5).unwrap();
        assert_eq!(g.message.text, again.message.text);
    }

    #[test]
    fn empty_backend_output_falls_back() {
        let prompts = RolePrompts::shipped();
        let (s, m) = session_with(&[], "hello");
        for backend in [Fixed(Ok(String::new())), Fixed(Ok("  ".into())), Fixed(Err(BackendError::Empty))] {
            let g = generate_response(BotRole::Peer, &s, &m, &backend, &prompts, 200).unwrap();
            assert!(g.message.degraded);
            assert_eq!(g.message.text, prompts.get(BotRole::Peer).fallback);
            assert_eq!(g.error, Some(BackendError::Empty));
        }
        let refused = Fixed(Err(BackendError::Refused("policy".into())));
        let g = generate_response(BotRole::CareerAdvisor, &s, &m, &refused, &prompts, 200).unwrap();
        assert!(g.message.degraded);
    }

    #[test]
    fn timeout_is_transient_error() {
        let prompts = RolePrompts::shipped();
        let (s, m) = session_with(&[], "hello");
        let slow = Fixed(Err(BackendError::Timeout(Duration::from_secs(30))));
        assert!(matches!(
            generate_response(BotRole::Instructor, &s, &m, &slow, &prompts, 200),
            Err(AgentError::Transient(BackendError::Timeout(_)))
        ));
    }

    #[test]
    fn role_fidelity_for_every_role() {
        let prompts = RolePrompts::shipped();
        let stub = StubBackend::shipped();
        let (s, m) = session_with(&["x", "y"], "Explain how a hash table works");
        for role in BotRole::ALL {
            let g = generate_response(role, &s, &m, &stub, &prompts, 0).unwrap();
            assert_eq!(g.message.author, crate::domain::Author::Bot(role));
            assert!(!g.message.text.trim().is_empty());
        }
    }

    #[test]
    fn stub_generation_is_fast() {
        let prompts = RolePrompts::shipped();
        let stub = StubBackend::shipped();
        let (s, m) = session_with(&["a", "b", "c"], "Compare merge sort and quick sort for large inputs");
        let start = Instant::now();
        let n = 50;
        for _ in 0..n {
            generate_response(BotRole::Instructor, &s, &m, &stub, &prompts, 0).unwrap();
        }
        let per_call = start.elapsed() / n;
        assert!(per_call < Duration::from_millis(10), "{per_call:?} per call");
    }
}
