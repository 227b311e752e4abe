//! Lexicon sentiment with a short negation window, and the empathy score
//! built on it.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::metrics::MetricConstants;
use crate::router::Pattern;
use crate::scalar::Real;
use crate::text;

const SHIPPED_SENTIMENT: &str = include_str!("../../data/sentiment.tsv");
const SHIPPED_ACKNOWLEDGMENTS: &str = include_str!("../../data/acknowledgment.txt");

/// Word valences in `[-1, 1]`.
#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    valences: HashMap<String, f64>,
}

impl SentimentLexicon {
    pub fn shipped() -> SentimentLexicon {
        SentimentLexicon::parse(SHIPPED_SENTIMENT).expect("shipped sentiment lexicon is valid")
    }

    /// Parses `word<TAB>valence` lines; `#` starts a comment line.
    pub fn parse(raw: &str) -> Result<SentimentLexicon> {
        let mut valences = HashMap::new();
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(word), Some(value), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::parse(
                    "sentiment lexicon",
                    format!("line {}: expected `word valence`", lineno + 1),
                ));
            };
            let value: f64 = value.parse().map_err(|e| {
                Error::parse("sentiment lexicon", format!("line {}: {e}", lineno + 1))
            })?;
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::parse(
                    "sentiment lexicon",
                    format!("line {}: valence {value} outside [-1, 1]", lineno + 1),
                ));
            }
            valences.insert(word.to_lowercase(), value);
        }
        Ok(SentimentLexicon { valences })
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.valences.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }
}

/// Phrase list matched on word boundaries (acknowledgment cues).
#[derive(Debug, Clone, Default)]
pub struct PhraseLexicon {
    phrases: Vec<Pattern>,
}

impl PhraseLexicon {
    pub fn shipped_acknowledgments() -> PhraseLexicon {
        PhraseLexicon::parse(SHIPPED_ACKNOWLEDGMENTS).expect("shipped phrases are valid")
    }

    pub fn parse(raw: &str) -> Result<PhraseLexicon> {
        let phrases = raw
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let words = text::words(l);
                if words.is_empty() {
                    Err(Error::parse("phrase lexicon", format!("{l:?} has no words")))
                } else {
                    Ok(Pattern::Phrase {
                        source: l.to_owned(),
                        words,
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhraseLexicon { phrases })
    }

    /// Total phrase occurrences in `text`.
    pub fn hits(&self, text: &str) -> usize {
        let words = text::words(text);
        self.phrases.iter().map(|p| p.count(text, &words)).sum()
    }
}

/// Mean signed valence of lexicon words; a word preceded by a negator within
/// the negation window has its sign flipped. No matches gives 0.
pub fn sentiment<T: Real>(
    text: &str,
    lexicon: &SentimentLexicon,
    constants: &MetricConstants,
) -> T {
    let words = text::words(text);
    let mut total = T::zero();
    let mut matched = 0usize;
    for (i, word) in words.iter().enumerate() {
        let Some(v) = lexicon.valence(word) else {
            continue;
        };
        let start = i.saturating_sub(constants.negation_window);
        let negated = words[start..i]
            .iter()
            .any(|w| constants.negators.iter().any(|n| n == w));
        let v = T::lit(v);
        total = total + if negated { -v } else { v };
        matched += 1;
    }
    if matched == 0 {
        return T::zero();
    }
    (total / T::from_count(matched)).clamp_to(-T::one(), T::one())
}

/// `w_ack * ack + w_comfort * comfort`, where `ack` saturates after a fixed
/// number of acknowledgment phrases and `comfort` is the response's positive
/// sentiment when the student text is negative (a neutral constant otherwise).
pub fn empathy<T: Real>(
    student_text: &str,
    response: &str,
    lexicon: &SentimentLexicon,
    acknowledgments: &PhraseLexicon,
    constants: &MetricConstants,
) -> Result<T> {
    if response.trim().is_empty() {
        return Err(Error::validation("empathy needs a non-empty response"));
    }
    let ack = (T::from_count(acknowledgments.hits(response))
        / T::lit(constants.empathy_ack_saturation))
    .min(T::one());
    let student: T = sentiment(student_text, lexicon, constants);
    let comfort = if student < T::lit(constants.empathy_distress_threshold) {
        sentiment::<T>(response, lexicon, constants).max(T::zero())
    } else {
        T::lit(constants.empathy_neutral_comfort)
    };
    Ok((T::lit(constants.empathy_ack_weight) * ack
        + T::lit(constants.empathy_comfort_weight) * comfort)
        .unit_clamp())
}
