//! Automated Readability Index.

use crate::error::{Error, Result};
use crate::metrics::MetricConstants;
use crate::scalar::Real;

/// The three counts ARI is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextCounts {
    /// Alphanumeric characters only.
    pub characters: usize,
    /// Whitespace-delimited words.
    pub words: usize,
    /// Segments between runs of `.`, `?` or `!` that contain an alphanumeric
    /// character; at least 1.
    pub sentences: usize,
}

impl TextCounts {
    pub fn of(text: &str) -> TextCounts {
        let characters = text.chars().filter(|c| c.is_alphanumeric()).count();
        let words = text.split_whitespace().count();
        let sentences = text
            .split(['.', '?', '!'])
            .filter(|seg| seg.chars().any(char::is_alphanumeric))
            .count()
            .max(1);
        TextCounts {
            characters,
            words,
            sentences,
        }
    }
}

/// `4.71 * chars/words + 0.5 * words/sentences - 21.43` with the default
/// constants.
pub fn ari<T: Real>(text: &str, constants: &MetricConstants) -> Result<T> {
    let counts = TextCounts::of(text);
    if counts.words == 0 {
        return Err(Error::validation("ARI needs at least one word"));
    }
    let chars = T::from_count(counts.characters);
    let words = T::from_count(counts.words);
    let sentences = T::from_count(counts.sentences);
    Ok(T::lit(constants.ari_char_weight) * (chars / words)
        + T::lit(constants.ari_sentence_weight) * (words / sentences)
        - T::lit(constants.ari_offset))
}

/// Maps an ARI grade onto `[0, 1]` over the configured window
/// (`[-6, 20]` by default).
pub fn fluency_norm<T: Real>(ari: T, constants: &MetricConstants) -> T {
    let lo = T::lit(constants.fluency_floor);
    let hi = T::lit(constants.fluency_ceiling);
    ((ari - lo) / (hi - lo)).unit_clamp()
}
