//! Tokenization and TF-IDF shared by the router, metrics and topic models.
//!
//! Two token streams exist. [`words`] lowercases and splits on any
//! non-alphanumeric character, keeping everything; lexicon matching runs on it.
//! [`content_tokens`] additionally drops stop-words and one-character tokens;
//! similarity, keyword extraction and topic modeling use it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use crate::scalar::Real;

/// Fixed English stop-word list.
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "don", "down", "during", "each", "few",
    "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "ll", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "re", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "ve", "very", "was", "we", "were", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you",
    "your", "yours", "yourself", "yourselves",
];

fn stop_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOP_WORDS.iter().copied().collect())
}

pub fn is_stop_word(token: &str) -> bool {
    stop_words().contains(token)
}

/// Lowercased alphanumeric runs, nothing dropped.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Lowercased alphanumeric runs without stop-words or one-character tokens.
pub fn content_tokens(text: &str) -> Vec<String> {
    words(text)
        .into_iter()
        .filter(|t| t.chars().count() > 1 && !is_stop_word(t))
        .collect()
}

/// Whitespace-delimited word count (the count readability and engagement use).
pub fn whitespace_word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Counts non-overlapping occurrences of `phrase` (already split with
/// [`words`]) as a contiguous run inside `tokens`.
pub fn count_phrase(tokens: &[String], phrase: &[String]) -> usize {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + phrase.len() <= tokens.len() {
        if tokens[i..i + phrase.len()] == *phrase {
            count += 1;
            i += phrase.len();
        } else {
            i += 1;
        }
    }
    count
}

/// Term counts for one document, in vocabulary order.
pub fn term_counts<S: AsRef<str>>(tokens: &[S]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref().to_owned()).or_insert(0) += 1;
    }
    counts
}

/// Smoothed inverse document frequencies over a small document set:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, with raw term counts as `tf`.
#[derive(Debug, Clone)]
pub struct TfIdf<T: Real> {
    docs: usize,
    idf: BTreeMap<String, T>,
}

impl<T: Real> TfIdf<T> {
    pub fn fit<S: AsRef<str>>(documents: &[Vec<S>]) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in documents {
            let unique: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
            for t in unique {
                *df.entry(t.to_owned()).or_insert(0) += 1;
            }
        }
        let n = T::from_count(documents.len());
        let idf = df
            .into_iter()
            .map(|(t, d)| {
                let w = ((T::one() + n) / (T::one() + T::from_count(d))).ln() + T::one();
                (t, w)
            })
            .collect();
        TfIdf {
            docs: documents.len(),
            idf,
        }
    }

    pub fn document_count(&self) -> usize {
        self.docs
    }

    pub fn idf(&self, term: &str) -> Option<T> {
        self.idf.get(term).copied()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.idf.keys().map(String::as_str)
    }

    /// Sparse TF-IDF vector of a document; terms unseen at fit time are skipped.
    pub fn vector<S: AsRef<str>>(&self, tokens: &[S]) -> BTreeMap<String, T> {
        term_counts(tokens)
            .into_iter()
            .filter_map(|(t, c)| self.idf.get(&t).map(|&w| (t, T::from_count(c) * w)))
            .collect()
    }
}

/// Cosine similarity of two sparse vectors. Zero vectors give 0.
pub fn cosine<T: Real>(a: &BTreeMap<String, T>, b: &BTreeMap<String, T>) -> T {
    let dot: T = a
        .iter()
        .filter_map(|(t, x)| b.get(t).map(|y| *x * *y))
        .sum();
    let na: T = a.values().map(|x| *x * *x).sum::<T>().sqrt();
    let nb: T = b.values().map(|x| *x * *x).sum::<T>().sqrt();
    if na == T::zero() || nb == T::zero() {
        return T::zero();
    }
    dot / (na * nb)
}

/// TF-IDF cosine between two texts, fit on the pair itself.
///
/// When either side has no content tokens the vectors are degenerate; the
/// result is then 1 if the two texts are identical after lowercasing and
/// whitespace normalization, else 0.
pub fn tfidf_cosine<T: Real>(a: &str, b: &str) -> T {
    let ta = content_tokens(a);
    let tb = content_tokens(b);
    if ta.is_empty() || tb.is_empty() {
        let norm = |s: &str| words(s).join(" ");
        return if norm(a) == norm(b) { T::one() } else { T::zero() };
    }
    let docs = [ta, tb];
    let model = TfIdf::<T>::fit(&docs);
    let va = model.vector(&docs[0]);
    let vb = model.vector(&docs[1]);
    cosine(&va, &vb).unit_clamp()
}
