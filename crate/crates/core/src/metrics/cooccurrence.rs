use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::QaPair;
use crate::scalar::Real;
use crate::text::{self, TfIdf};

/// Question-keyword by answer-keyword pair counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub keywords: Vec<String>,
    /// `counts[i][j]`: pairs whose question contains `keywords[i]` and whose
    /// answer contains `keywords[j]`.
    pub counts: Vec<Vec<usize>>,
}

/// Keyword weight: `idf(t) * total count of t`, over every question and
/// answer treated as separate documents. Integer counts keep the ranking
/// independent of pair order.
pub fn keyword_ranking<T: Real>(pairs: &[QaPair]) -> Vec<(String, T)> {
    let docs: Vec<Vec<String>> = pairs
        .iter()
        .flat_map(|p| [text::content_tokens(&p.question), text::content_tokens(&p.answer)])
        .collect();
    let model = TfIdf::<T>::fit(&docs);
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &docs {
        for t in doc {
            *totals.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, T)> = totals
        .into_iter()
        .map(|(t, n)| {
            let idf = model.idf(t).unwrap_or_else(T::zero);
            (t.to_owned(), idf * T::from_count(n))
        })
        .collect();
    ranked.sort_by(|(ta, a), (tb, b)| {
        b.partial_cmp(a)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ta.cmp(tb))
    });
    ranked
}

/// Top-`k` keywords and their question/answer co-occurrence counts. When the
/// corpus has fewer than `k` distinct content words the matrix shrinks to the
/// vocabulary size.
pub fn keyword_cooccurrence(pairs: &[QaPair], k: usize) -> Result<CooccurrenceMatrix> {
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    if pairs.is_empty() {
        return Err(Error::validation("keyword co-occurrence needs a non-empty corpus"));
    }
    let keywords: Vec<String> = keyword_ranking::<f64>(pairs)
        .into_iter()
        .take(k)
        .map(|(t, _)| t)
        .collect();
    let n = keywords.len();
    let mut counts = vec![vec![0usize; n]; n];
    for pair in pairs {
        let q: BTreeSet<String> = text::content_tokens(&pair.question).into_iter().collect();
        let a: BTreeSet<String> = text::content_tokens(&pair.answer).into_iter().collect();
        for (i, ki) in keywords.iter().enumerate() {
            if !q.contains(ki) {
                continue;
            }
            for (j, kj) in keywords.iter().enumerate() {
                if a.contains(kj) {
                    counts[i][j] += 1;
                }
            }
        }
    }
    Ok(CooccurrenceMatrix { keywords, counts })
}
