//! Five-dimension response quality metric (accuracy, fluency, empathy,
//! engagement, relevance) and keyword co-occurrence analysis.
//!
//! Every weight, cap and window lives in [`MetricConstants`] so it can be
//! recalibrated from configuration without touching the formulas.

mod accuracy;
mod cooccurrence;
mod readability;
mod report;
mod sentiment;

pub use accuracy::{code_match, code_tokens, strip_comments, token_f1};
pub use cooccurrence::{keyword_cooccurrence, keyword_ranking, CooccurrenceMatrix};
pub use readability::{ari, fluency_norm, TextCounts};
pub use report::{
    aggregate_by_level, pearson, rubric_correlations, Dimension, DimensionCorrelation,
    LevelAggregate, MetricReport, QaKind, QaPair, RubricScores,
};
pub use sentiment::{empathy, sentiment, PhraseLexicon, SentimentLexicon};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConstants {
    pub ari_char_weight: f64,
    pub ari_sentence_weight: f64,
    pub ari_offset: f64,
    pub fluency_floor: f64,
    pub fluency_ceiling: f64,
    pub empathy_ack_weight: f64,
    pub empathy_comfort_weight: f64,
    pub empathy_ack_saturation: f64,
    pub empathy_distress_threshold: f64,
    pub empathy_neutral_comfort: f64,
    pub engagement_word_weight: f64,
    pub engagement_word_cap: f64,
    pub engagement_question_weight: f64,
    pub engagement_question_cap: f64,
    pub negation_window: usize,
    pub negators: Vec<String>,
}

impl Default for MetricConstants {
    fn default() -> Self {
        MetricConstants {
            ari_char_weight: 4.71,
            ari_sentence_weight: 0.5,
            ari_offset: 21.43,
            fluency_floor: -6.0,
            fluency_ceiling: 20.0,
            empathy_ack_weight: 0.5,
            empathy_comfort_weight: 0.5,
            empathy_ack_saturation: 2.0,
            empathy_distress_threshold: -0.1,
            empathy_neutral_comfort: 0.5,
            engagement_word_weight: 0.7,
            engagement_word_cap: 120.0,
            engagement_question_weight: 0.3,
            engagement_question_cap: 2.0,
            negation_window: 2,
            negators: vec!["not".into(), "no".into(), "never".into()],
        }
    }
}

impl MetricConstants {
    pub fn validate(&self) -> Result<()> {
        if self.fluency_ceiling <= self.fluency_floor {
            return Err(Error::validation("fluency window is empty"));
        }
        for (name, v) in [
            ("empathy_ack_saturation", self.empathy_ack_saturation),
            ("engagement_word_cap", self.engagement_word_cap),
            ("engagement_question_cap", self.engagement_question_cap),
        ] {
            if v <= 0.0 {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// `w_words * min(words / cap, 1) + w_questions * min('?' count / cap, 1)`.
pub fn engagement<T: Real>(response: &str, constants: &MetricConstants) -> T {
    let words = T::from_count(text::whitespace_word_count(response));
    let questions = T::from_count(response.chars().filter(|&c| c == '?').count());
    let word_share = (words / T::lit(constants.engagement_word_cap)).min(T::one());
    let question_share = (questions / T::lit(constants.engagement_question_cap)).min(T::one());
    (T::lit(constants.engagement_word_weight) * word_share
        + T::lit(constants.engagement_question_weight) * question_share)
        .unit_clamp()
}

/// TF-IDF cosine between question and answer.
pub fn relevance<T: Real>(question: &str, answer: &str) -> Result<T> {
    if question.trim().is_empty() || answer.trim().is_empty() {
        return Err(Error::validation("relevance needs two non-empty texts"));
    }
    Ok(text::tfidf_cosine(question, answer))
}

/// Lexicons and constants bundled for scoring.
#[derive(Debug, Clone)]
pub struct Evaluator {
    constants: MetricConstants,
    sentiment: SentimentLexicon,
    acknowledgments: PhraseLexicon,
}

impl Default for Evaluator {
    fn default() -> Self {
        Evaluator::shipped()
    }
}

impl Evaluator {
    pub fn shipped() -> Evaluator {
        Evaluator::new(
            MetricConstants::default(),
            SentimentLexicon::shipped(),
            PhraseLexicon::shipped_acknowledgments(),
        )
    }

    pub fn new(
        constants: MetricConstants,
        sentiment: SentimentLexicon,
        acknowledgments: PhraseLexicon,
    ) -> Evaluator {
        Evaluator {
            constants,
            sentiment,
            acknowledgments,
        }
    }

    pub fn with_constants(mut self, constants: MetricConstants) -> Evaluator {
        self.constants = constants;
        self
    }

    pub fn constants(&self) -> &MetricConstants {
        &self.constants
    }

    pub fn sentiment_lexicon(&self) -> &SentimentLexicon {
        &self.sentiment
    }

    pub fn ari<T: Real>(&self, text: &str) -> Result<T> {
        ari(text, &self.constants)
    }

    pub fn sentiment<T: Real>(&self, text: &str) -> T {
        sentiment(text, &self.sentiment, &self.constants)
    }

    pub fn empathy<T: Real>(&self, student_text: &str, response: &str) -> Result<T> {
        empathy(
            student_text,
            response,
            &self.sentiment,
            &self.acknowledgments,
            &self.constants,
        )
    }

    pub fn engagement<T: Real>(&self, response: &str) -> T {
        engagement(response, &self.constants)
    }

    pub fn relevance<T: Real>(&self, question: &str, answer: &str) -> Result<T> {
        relevance(question, answer)
    }

    /// Code: exact match after normalization, else token F1. Free-form with a
    /// reference: relevance to the reference. Free-form without: `None`.
    pub fn accuracy<T: Real>(&self, pair: &QaPair) -> Result<Option<T>> {
        match (pair.kind, pair.reference.as_deref()) {
            (QaKind::CodeCheck, Some(reference)) if !reference.trim().is_empty() => {
                Ok(Some(code_match(&pair.answer, reference)))
            }
            (QaKind::CodeCheck, _) => Err(Error::validation(
                "code-check pairs need a reference solution",
            )),
            (QaKind::FreeQa, Some(reference)) if !reference.trim().is_empty() => {
                relevance(&pair.answer, reference).map(Some)
            }
            (QaKind::FreeQa, _) => Ok(None),
        }
    }

    /// All automated dimensions for one pair. For code-check pairs relevance is
    /// the accuracy score.
    pub fn evaluate<T: Real>(
        &self,
        pair: &QaPair,
        rubric: Option<RubricScores<T>>,
    ) -> Result<MetricReport<T>> {
        pair.validate()?;
        if let Some(r) = &rubric {
            r.validate()?;
        }
        let accuracy = self.accuracy::<T>(pair)?;
        let fluency_ari = self.ari::<T>(&pair.answer)?;
        let relevance = match (pair.kind, accuracy) {
            (QaKind::CodeCheck, Some(acc)) => acc,
            _ => self.relevance(&pair.question, &pair.answer)?,
        };
        Ok(MetricReport {
            accuracy,
            fluency_ari,
            fluency_norm: fluency_norm(fluency_ari, &self.constants),
            empathy: self.empathy(&pair.question, &pair.answer)?,
            engagement: self.engagement(&pair.answer),
            relevance,
            human_scores: rubric,
        })
    }
}
