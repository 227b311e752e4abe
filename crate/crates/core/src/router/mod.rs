//! The Chatbot Manager: classifies a student inquiry and picks the bot that
//! answers it.
//!
//! Classification is deterministic lexicon scoring:
//!
//! * category = the category with the most term hits, ties broken by
//!   [`tie_break`], `Academic` when nothing matches;
//! * Bloom level = the highest level with a matching pattern, `Remember` when
//!   none match;
//! * complexity = `0.5 * min(words / 100, 1) + 0.5 * (level - 1) / 5`.
//!
//! Routing then applies, in order: a leading address token (`@career ...`),
//! the single-bot condition, and the category-to-role map.

mod lexicon;

pub use lexicon::{Pattern, RouterLexicon};

use serde::{Deserialize, Serialize};

use crate::domain::{BloomLevel, BotRole, Category, Condition, InquiryClassification};
use crate::error::{Error, Result};
use crate::text;

/// The Manager's decision for one student message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub role: BotRole,
    pub confidence: f64,
    pub rationale: String,
    pub overridden: bool,
}

impl RoutingDecision {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::validation(format!(
                "routing confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if self.overridden && !self.rationale.contains('@') {
            return Err(Error::validation(
                "overridden routing must name the address token",
            ));
        }
        Ok(())
    }
}

/// Hit counts per category for one message.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryHits {
    counts: [usize; 4],
    matched: Vec<String>,
}

impl CategoryHits {
    fn idx(c: Category) -> usize {
        match c {
            Category::Academic => 0,
            Category::Social => 1,
            Category::Career => 2,
            Category::Emotional => 3,
        }
    }

    pub fn get(&self, c: Category) -> usize {
        self.counts[Self::idx(c)]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Distinct terms that fired, in category then lexicon order.
    pub fn matched_terms(&self) -> &[String] {
        &self.matched
    }

    /// Categories sharing the maximum (non-zero) hit count.
    pub fn leaders(&self) -> Vec<Category> {
        let best = self.counts.iter().copied().max().unwrap_or(0);
        if best == 0 {
            return Vec::new();
        }
        Category::ALL
            .into_iter()
            .filter(|c| self.get(*c) == best)
            .collect()
    }
}

/// Counts lexicon term hits per category.
pub fn score_categories(text: &str, lexicon: &RouterLexicon) -> CategoryHits {
    let words = text::words(text);
    let mut hits = CategoryHits::default();
    for category in Category::ALL {
        for term in lexicon.category_terms(category) {
            let n = term.count(text, &words);
            if n > 0 {
                hits.counts[CategoryHits::idx(category)] += n;
                hits.matched.push(term.source().to_owned());
            }
        }
    }
    hits
}

/// Highest Bloom level whose pattern matches, `Remember` by default.
pub fn detect_bloom(text: &str, lexicon: &RouterLexicon) -> BloomLevel {
    let words = text::words(text);
    lexicon
        .bloom_patterns()
        .iter()
        .rev()
        .find(|(_, patterns)| patterns.iter().any(|p| p.count(text, &words) > 0))
        .map(|(level, _)| *level)
        .unwrap_or(BloomLevel::Remember)
}

/// Token share plus Bloom share, equally weighted.
pub fn complexity(word_count: usize, bloom: BloomLevel) -> f64 {
    let length = (word_count as f64 / 100.0).min(1.0);
    let level = f64::from(bloom.ordinal() - 1) / 5.0;
    0.5 * length + 0.5 * level
}

/// Resolves equal top hit counts with the fixed priority
/// Emotional > Academic > Career > Social.
pub fn tie_break(tied: &[Category]) -> Option<Category> {
    const PRIORITY: [Category; 4] = [
        Category::Emotional,
        Category::Academic,
        Category::Career,
        Category::Social,
    ];
    PRIORITY.into_iter().find(|c| tied.contains(c))
}

pub fn classify_inquiry(text: &str, lexicon: &RouterLexicon) -> Result<InquiryClassification> {
    if text.trim().is_empty() {
        return Err(Error::validation("inquiry text is empty"));
    }
    let hits = score_categories(text, lexicon);
    let category = tie_break(&hits.leaders()).unwrap_or(Category::Academic);
    let bloom = detect_bloom(text, lexicon);
    Ok(InquiryClassification {
        category,
        bloom,
        complexity: complexity(text::whitespace_word_count(text), bloom),
        matched_terms: hits.matched,
    })
}

pub fn route(
    classification: &InquiryClassification,
    text: &str,
    condition: Condition,
    lexicon: &RouterLexicon,
) -> RoutingDecision {
    if let Some((role, token)) = lexicon.addressed_role(text) {
        return RoutingDecision {
            role,
            confidence: 1.0,
            rationale: format!("explicit address {token}"),
            overridden: true,
        };
    }
    if condition == Condition::SingleBot {
        return RoutingDecision {
            role: BotRole::Instructor,
            confidence: 1.0,
            rationale: "single-bot condition".into(),
            overridden: false,
        };
    }
    let hits = score_categories(text, lexicon);
    if hits.total() == 0 {
        return RoutingDecision {
            role: BotRole::Instructor,
            confidence: 0.0,
            rationale: "fallback".into(),
            overridden: false,
        };
    }
    let top = classification.category;
    let leaders = hits.leaders();
    let mut rationale = format!("{top} {}/{} hits", hits.get(top), hits.total());
    if leaders.len() > 1 {
        let names: Vec<&str> = leaders.iter().map(|c| c.as_str()).collect();
        rationale.push_str(&format!("; tie among {}", names.join(",")));
    }
    RoutingDecision {
        role: BotRole::for_category(top),
        confidence: hits.get(top) as f64 / hits.total().max(1) as f64,
        rationale,
        overridden: false,
    }
}

/// Classifies and routes in one step.
pub fn dispatch(
    text: &str,
    condition: Condition,
    lexicon: &RouterLexicon,
) -> Result<(InquiryClassification, RoutingDecision)> {
    let classification = classify_inquiry(text, lexicon)?;
    let decision = route(&classification, text, condition, lexicon);
    Ok((classification, decision))
}
