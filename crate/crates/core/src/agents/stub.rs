use std::collections::BTreeMap;

use serde::Deserialize;

use crate::agents::backend::{truncate_tokens, BackendError, GenerationBackend, GenerationRequest};
use crate::domain::{BloomLevel, BotRole};
use crate::error::{Error, Result};
use crate::metrics::QaPair;
use crate::text;

const SHIPPED_TEMPLATES: &str = include_str!("../../data/stub_templates.toml");
const SHIPPED_CORPUS: &str = include_str!("../../data/reference_qa.jsonl");

/// Minimum TF-IDF cosine for a reference answer to be used.
pub const RETRIEVAL_THRESHOLD: f64 = 0.3;

/// Parses the JSON-lines Q&A format (one [`QaPair`] per line; blank lines
/// skipped).
pub fn parse_qa_jsonl(raw: &str, source_name: &str) -> Result<Vec<QaPair>> {
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<QaPair>(l)
                .map_err(|e| Error::parse(source_name, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

/// The Bloom-tagged reference corpus bundled with the crate.
pub fn shipped_reference_corpus() -> Vec<QaPair> {
    parse_qa_jsonl(SHIPPED_CORPUS, "reference corpus").expect("shipped corpus is valid")
}

#[derive(Debug, Deserialize)]
struct TemplateFile {
    generic: BTreeMap<String, String>,
    #[serde(flatten)]
    roles: BTreeMap<String, BTreeMap<String, String>>,
}

/// Reply templates for every (role, Bloom level).
#[derive(Debug, Clone)]
pub struct StubTemplates {
    generic: BTreeMap<BotRole, String>,
    table: BTreeMap<(BotRole, BloomLevel), String>,
}

impl StubTemplates {
    pub fn shipped() -> StubTemplates {
        StubTemplates::from_toml_str(SHIPPED_TEMPLATES).expect("shipped templates are valid")
    }

    pub fn from_toml_str(raw: &str) -> Result<StubTemplates> {
        let file: TemplateFile =
            toml::from_str(raw).map_err(|e| Error::parse("stub templates", e))?;
        let mut generic = BTreeMap::new();
        for (name, line) in file.generic {
            generic.insert(name.parse::<BotRole>()?, line);
        }
        let mut table = BTreeMap::new();
        for (role_name, levels) in file.roles {
            let role: BotRole = role_name.parse()?;
            for (level_name, template) in levels {
                table.insert((role, BloomLevel::from_name(&level_name)?), template);
            }
        }
        for role in BotRole::ALL {
            if !generic.contains_key(&role) {
                return Err(Error::parse("stub templates", format!("no generic line for {role}")));
            }
            for level in BloomLevel::ALL {
                if !table.contains_key(&(role, level)) {
                    return Err(Error::parse(
                        "stub templates",
                        format!("no template for ({role}, {level})"),
                    ));
                }
            }
        }
        Ok(StubTemplates { generic, table })
    }

    pub fn template(&self, role: BotRole, level: BloomLevel) -> &str {
        &self.table[&(role, level)]
    }

    pub fn generic(&self, role: BotRole) -> &str {
        &self.generic[&role]
    }
}

/// Deterministic offline backend: retrieves the closest reference answer and
/// fills the (role, level) template with it.
#[derive(Debug, Clone)]
pub struct StubBackend {
    templates: StubTemplates,
    corpus: Vec<QaPair>,
    threshold: f64,
}

impl Default for StubBackend {
    fn default() -> Self {
        StubBackend::shipped()
    }
}

impl StubBackend {
    pub fn shipped() -> StubBackend {
        StubBackend::new(StubTemplates::shipped(), shipped_reference_corpus())
    }

    pub fn new(templates: StubTemplates, corpus: Vec<QaPair>) -> StubBackend {
        StubBackend {
            templates,
            corpus,
            threshold: RETRIEVAL_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> StubBackend {
        self.threshold = threshold;
        self
    }

    pub fn templates(&self) -> &StubTemplates {
        &self.templates
    }

    /// Best corpus match at or above the threshold; earlier entries win ties.
    pub fn retrieve(&self, inquiry: &str) -> Option<(&QaPair, f64)> {
        let mut best: Option<(&QaPair, f64)> = None;
        for pair in &self.corpus {
            let score: f64 = text::tfidf_cosine(inquiry, &pair.question);
            if score >= self.threshold && best.is_none_or(|(_, s)| score > s) {
                best = Some((pair, score));
            }
        }
        best
    }

    /// The reply text before length truncation.
    pub fn render(&self, role: BotRole, level: BloomLevel, inquiry: &str) -> String {
        let answer = match self.retrieve(inquiry) {
            Some((pair, _)) => pair.answer.as_str(),
            None => self.templates.generic(role),
        };
        self.templates.template(role, level).replace("{answer}", answer)
    }
}

impl GenerationBackend for StubBackend {
    fn name(&self) -> &str {
        "stub"
    }

    fn complete(&self, request: &GenerationRequest) -> std::result::Result<String, BackendError> {
        let reply = truncate_tokens(
            &self.render(request.role, request.bloom, &request.inquiry),
            request.max_tokens,
        );
        if reply.is_empty() {
            return Err(BackendError::Empty);
        }
        Ok(reply)
    }
}
