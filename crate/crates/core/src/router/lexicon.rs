use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::Deserialize;

use crate::domain::{BloomLevel, BotRole, Category};
use crate::error::{Error, Result};
use crate::text;

const SHIPPED_LEXICON: &str = include_str!("../../data/lexicon.toml");

/// A lexicon entry compiled for matching against [`text::words`] output.
#[derive(Debug, Clone)]
pub enum Pattern {
    Phrase { source: String, words: Vec<String> },
    Regex { source: String, regex: Regex },
}

impl Pattern {
    fn compile(entry: &str) -> Result<Pattern> {
        if let Some(expr) = entry.strip_prefix("re:") {
            let regex = RegexBuilder::new(expr)
                .case_insensitive(true)
                .build()
                .map_err(|e| Error::Lexicon(format!("bad pattern {entry:?}: {e}")))?;
            return Ok(Pattern::Regex {
                source: entry.to_owned(),
                regex,
            });
        }
        let words = text::words(entry);
        if words.is_empty() {
            return Err(Error::Lexicon(format!("entry {entry:?} has no words")));
        }
        Ok(Pattern::Phrase {
            source: entry.to_owned(),
            words,
        })
    }

    pub fn source(&self) -> &str {
        match self {
            Pattern::Phrase { source, .. } | Pattern::Regex { source, .. } => source,
        }
    }

    /// Number of occurrences in a message. `raw` is the original text,
    /// `words` its [`text::words`] split.
    pub fn count(&self, raw: &str, words: &[String]) -> usize {
        match self {
            Pattern::Phrase { words: phrase, .. } => text::count_phrase(words, phrase),
            Pattern::Regex { regex, .. } => regex.find_iter(raw).count(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    categories: BTreeMap<String, Vec<String>>,
    bloom: BTreeMap<String, Vec<String>>,
    address: BTreeMap<String, String>,
}

/// Category terms, Bloom patterns and explicit-address tokens.
#[derive(Debug, Clone)]
pub struct RouterLexicon {
    categories: Vec<(Category, Vec<Pattern>)>,
    bloom: Vec<(BloomLevel, Vec<Pattern>)>,
    address: Vec<(BotRole, String)>,
}

impl RouterLexicon {
    /// The lexicon bundled with the crate.
    pub fn shipped() -> RouterLexicon {
        RouterLexicon::from_toml_str(SHIPPED_LEXICON).expect("shipped lexicon is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<RouterLexicon> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::parse(path.display().to_string(), e))?;
        RouterLexicon::from_toml_str(&raw)
    }

    pub fn from_toml_str(raw: &str) -> Result<RouterLexicon> {
        let file: LexiconFile = toml::from_str(raw).map_err(|e| Error::parse("lexicon", e))?;

        let mut categories = Vec::new();
        let mut owner: HashMap<Vec<String>, Category> = HashMap::new();
        for (name, entries) in &file.categories {
            let category = Category::ALL
                .into_iter()
                .find(|c| c.as_str() == name)
                .ok_or_else(|| Error::Lexicon(format!("unknown category {name:?}")))?;
            if entries.is_empty() {
                return Err(Error::Lexicon(format!("category {name} has no terms")));
            }
            let mut patterns = Vec::with_capacity(entries.len());
            for entry in entries {
                let pattern = Pattern::compile(entry)?;
                if let Pattern::Phrase { words, .. } = &pattern {
                    if let Some(prev) = owner.insert(words.clone(), category) {
                        if prev != category {
                            return Err(Error::Lexicon(format!(
                                "term {entry:?} appears in both {prev} and {category}"
                            )));
                        }
                    }
                }
                patterns.push(pattern);
            }
            categories.push((category, patterns));
        }
        for c in Category::ALL {
            if !categories.iter().any(|(k, _)| *k == c) {
                return Err(Error::Lexicon(format!("category {c} missing")));
            }
        }
        categories.sort_by_key(|(c, _)| *c);

        let mut bloom = Vec::new();
        for (name, entries) in &file.bloom {
            let level = BloomLevel::from_name(name).map_err(|e| Error::Lexicon(e.to_string()))?;
            let patterns = entries
                .iter()
                .map(|e| Pattern::compile(e))
                .collect::<Result<Vec<_>>>()?;
            bloom.push((level, patterns));
        }
        bloom.sort_by_key(|(l, _)| *l);

        let mut address = Vec::new();
        for (name, token) in &file.address {
            let role: BotRole = name
                .parse()
                .map_err(|e: Error| Error::Lexicon(e.to_string()))?;
            let token = token.trim().to_lowercase();
            if !token.starts_with('@') || token.len() < 2 {
                return Err(Error::Lexicon(format!(
                    "address token {token:?} must start with '@'"
                )));
            }
            address.push((role, token));
        }
        for role in BotRole::ALL {
            if !address.iter().any(|(r, _)| *r == role) {
                return Err(Error::Lexicon(format!("address token for {role} missing")));
            }
        }

        Ok(RouterLexicon {
            categories,
            bloom,
            address,
        })
    }

    pub fn category_terms(&self, category: Category) -> &[Pattern] {
        self.categories
            .iter()
            .find(|(c, _)| *c == category)
            .map(|(_, p)| p.as_slice())
            .unwrap_or(&[])
    }

    /// Bloom levels with their patterns, lowest level first.
    pub fn bloom_patterns(&self) -> &[(BloomLevel, Vec<Pattern>)] {
        &self.bloom
    }

    pub fn address_token(&self, role: BotRole) -> &str {
        self.address
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, t)| t.as_str())
            .unwrap_or_default()
    }

    /// The role named by a leading address token, if any. The token must be
    /// followed by the end of the text or a non-alphanumeric character.
    pub fn addressed_role(&self, text: &str) -> Option<(BotRole, &str)> {
        let lowered = text.trim_start().to_lowercase();
        self.address.iter().find_map(|(role, token)| {
            let rest = lowered.strip_prefix(token.as_str())?;
            match rest.chars().next() {
                Some(c) if c.is_alphanumeric() || c == '_' => None,
                _ => Some((*role, token.as_str())),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lexicon_loads() {
        let lex = RouterLexicon::shipped();
        for c in Category::ALL {
            assert!(!lex.category_terms(c).is_empty());
        }
        assert_eq!(lex.bloom_patterns().len(), 6);
        assert_eq!(lex.address_token(BotRole::CareerAdvisor), "@career");
    }

    #[test]
    fn duplicate_term_across_categories_is_rejected() {
        let raw = SHIPPED_LEXICON.replace("\"buddy\",", "\"buddy\", \"stressed\",");
        let err = RouterLexicon::from_toml_str(&raw).unwrap_err();
        assert!(matches!(err, Error::Lexicon(m) if m.contains("stressed")));
    }

    #[test]
    fn empty_category_is_rejected() {
        let raw = r#"
[categories]
academic = ["loop"]
social = []
career = ["job"]
emotional = ["sad"]
[bloom]
[address]
instructor = "@instructor"
peer = "@peer"
career = "@career"
emotional = "@emotional"
"#;
        assert!(RouterLexicon::from_toml_str(raw).is_err());
    }

    #[test]
    fn regex_entries_are_case_insensitive() {
        let p = Pattern::compile(r"re:\bhow\s+can\s+i\b").unwrap();
        assert_eq!(p.count("HOW can I do this", &[]), 1);
        assert!(Pattern::compile("re:(").is_err());
    }

    #[test]
    fn address_token_needs_word_boundary() {
        let lex = RouterLexicon::shipped();
        assert_eq!(
            lex.addressed_role("  @Career what jobs?").map(|(r, _)| r),
            Some(BotRole::CareerAdvisor)
        );
        assert_eq!(
            lex.addressed_role("@peer, hi").map(|(r, _)| r),
            Some(BotRole::Peer)
        );
        assert_eq!(lex.addressed_role("@careers are hard"), None);
        assert_eq!(lex.addressed_role("hi @peer"), None);
    }
}
