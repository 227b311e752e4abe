//! LDA topic model fitted by collapsed Gibbs sampling.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::text;

/// Documents as word ids over a sorted vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: Vec<String>,
    documents: Vec<Vec<usize>>,
}

impl Corpus {
    /// Tokenizes with [`text::content_tokens`].
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Result<Corpus> {
        Corpus::from_tokens(texts.iter().map(|t| text::content_tokens(t.as_ref())).collect())
    }

    /// Uses the given tokens verbatim.
    pub fn from_tokens(documents: Vec<Vec<String>>) -> Result<Corpus> {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in &documents {
            for t in doc {
                index.entry(t.as_str()).or_insert(0);
            }
        }
        if index.is_empty() {
            return Err(Error::validation("topic corpus has no tokens"));
        }
        for (i, id) in index.values_mut().enumerate() {
            *id = i;
        }
        let vocabulary: Vec<String> = index.keys().map(|s| s.to_string()).collect();
        let documents = documents
            .iter()
            .map(|doc| doc.iter().map(|t| index[t.as_str()]).collect())
            .collect();
        Ok(Corpus {
            vocabulary,
            documents,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn documents(&self) -> &[Vec<usize>] {
        &self.documents
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LdaParams<T> {
    pub topics: usize,
    pub alpha: T,
    pub beta: T,
    pub iterations: usize,
    pub seed: u64,
}

impl<T: Real> LdaParams<T> {
    /// Defaults: alpha 0.1, beta 0.01, 500 sweeps, seed 0.
    pub fn new(topics: usize) -> Self {
        LdaParams {
            topics,
            alpha: T::lit(0.1),
            beta: T::lit(0.01),
            iterations: 500,
            seed: 0,
        }
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TopicModel<T> {
    pub params: LdaParams<T>,
    pub vocabulary: Vec<String>,
    /// K x V topic-word distributions.
    pub phi: Vec<Vec<T>>,
    /// D x K document-topic distributions.
    pub theta: Vec<Vec<T>>,
    /// Final topic id of every token, per document.
    pub assignments: Vec<Vec<usize>>,
}

impl<T: Real> TopicModel<T> {
    pub fn topics(&self) -> usize {
        self.params.topics
    }
}

pub fn fit_topics<T: Real>(corpus: &Corpus, params: &LdaParams<T>) -> Result<TopicModel<T>> {
    let k = params.topics;
    if k < 1 {
        return Err(Error::validation("topic count must be at least 1"));
    }
    let positive = |x: T| x > T::zero();
    if !positive(params.alpha) || !positive(params.beta) {
        return Err(Error::validation("alpha and beta must be positive"));
    }
    if corpus.token_count() == 0 {
        return Err(Error::validation("topic corpus has no tokens"));
    }
    let v = corpus.vocabulary.len();
    let docs = &corpus.documents;
    let (alpha, beta) = (params.alpha, params.beta);
    let v_beta = T::from_count(v) * beta;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut doc_topic = vec![vec![0usize; k]; docs.len()];
    let mut topic_word = vec![vec![0usize; v]; k];
    let mut topic_total = vec![0usize; k];
    let mut assignments: Vec<Vec<usize>> = docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            doc.iter()
                .map(|&w| {
                    let z = rng.random_range(0..k);
                    doc_topic[d][z] += 1;
                    topic_word[z][w] += 1;
                    topic_total[z] += 1;
                    z
                })
                .collect()
        })
        .collect();

    let mut weights = vec![T::zero(); k];
    for _ in 0..params.iterations {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = assignments[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old][w] -= 1;
                topic_total[old] -= 1;

                let mut total = T::zero();
                for (t, weight) in weights.iter_mut().enumerate() {
                    let p = (T::from_count(doc_topic[d][t]) + alpha)
                        * (T::from_count(topic_word[t][w]) + beta)
                        / (T::from_count(topic_total[t]) + v_beta);
                    total = total + p;
                    *weight = total;
                }
                let u = T::lit(rng.random::<f64>()) * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                assignments[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new][w] += 1;
                topic_total[new] += 1;
            }
        }
    }

    let phi = (0..k)
        .map(|t| {
            let denom = T::from_count(topic_total[t]) + v_beta;
            normalize(
                (0..v)
                    .map(|w| (T::from_count(topic_word[t][w]) + beta) / denom)
                    .collect(),
            )
        })
        .collect();
    let k_alpha = T::from_count(k) * alpha;
    let theta = docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            let denom = T::from_count(doc.len()) + k_alpha;
            normalize(
                (0..k)
                    .map(|t| (T::from_count(doc_topic[d][t]) + alpha) / denom)
                    .collect(),
            )
        })
        .collect();

    Ok(TopicModel {
        params: *params,
        vocabulary: corpus.vocabulary.clone(),
        phi,
        theta,
        assignments,
    })
}

/// Rescales by the row sum to remove accumulated rounding.
fn normalize<T: Real>(mut row: Vec<T>) -> Vec<T> {
    let s: T = row.iter().copied().sum();
    if s > T::zero() {
        for x in &mut row {
            *x = *x / s;
        }
    }
    row
}

/// The `n` most probable words of `topic`, ties broken lexicographically.
pub fn top_words<T: Real>(model: &TopicModel<T>, topic: usize, n: usize) -> Result<Vec<(String, T)>> {
    let row = model.phi.get(topic).ok_or(Error::OutOfRange {
        what: "topic",
        index: topic,
        limit: model.topics(),
    })?;
    let mut ranked: Vec<(String, T)> = model
        .vocabulary
        .iter()
        .cloned()
        .zip(row.iter().copied())
        .collect();
    ranked.sort_by(|(wa, a), (wb, b)| {
        b.partial_cmp(a)
            .unwrap_or(Ordering::Equal)
            .then_with(|| wa.cmp(wb))
    });
    ranked.truncate(n);
    Ok(ranked)
}
