//! Topic and sequence reports over snapshots of the session store.

use serde::{Deserialize, Serialize};

use tutorbots_core::analytics::{build_sequences, export_sequence_plot, fit_topics, top_words, transition_matrix, Corpus, InteractionEvent};
use tutorbots_core::{LdaParams, Session, TransitionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicQuery {
    pub k: usize,
    pub iterations: usize,
    pub seed: u64,
    pub top: usize,
}

impl Default for TopicQuery {
    fn default() -> Self {
        TopicQuery {
            k: 5,
            iterations: 500,
            seed: 0,
            top: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedWord {
    pub word: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub topic: usize,
    pub words: Vec<WeightedWord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub params: LdaParams,
    pub documents: usize,
    pub vocabulary_size: usize,
    pub topics: Vec<Topic>,
}

/// Student message texts, one document each.
pub fn student_documents<'a>(sessions: impl IntoIterator<Item = &'a Session>) -> Vec<String> {
    sessions
        .into_iter()
        .flat_map(|s| s.messages())
        .filter(|m| m.author.is_student())
        .map(|m| m.text.clone())
        .collect()
}

pub fn topic_report(documents: &[String], query: TopicQuery) -> tutorbots_core::Result<TopicReport> {
    let corpus = Corpus::from_texts(documents)?;
    let params = LdaParams::new(query.k)
        .iterations(query.iterations)
        .seed(query.seed);
    let model = fit_topics(&corpus, &params)?;
    let topics = (0..query.k)
        .map(|t| {
            Ok(Topic {
                topic: t,
                words: top_words(&model, t, query.top)?
                    .into_iter()
                    .map(|(word, weight)| WeightedWord { word, weight })
                    .collect(),
            })
        })
        .collect::<tutorbots_core::Result<_>>()?;
    Ok(TopicReport {
        params,
        documents: documents.len(),
        vocabulary_size: corpus.vocabulary().len(),
        topics,
    })
}

pub fn sequence_plot(events: &[InteractionEvent]) -> String {
    export_sequence_plot(&build_sequences(events))
}

pub fn transitions(events: &[InteractionEvent]) -> tutorbots_core::Result<TransitionMatrix> {
    transition_matrix(&build_sequences(events))
}
