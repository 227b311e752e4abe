//! Corpus- and log-level analyses: topic models, sentiment timelines and
//! interaction sequences.

mod sequences;
mod topics;

pub use sequences::{
    build_sequences, export_sequence_plot, plot_header, transition_matrix, EventCategory,
    EventKind, InteractionEvent, Page, Sequences, TransitionMatrix,
};
pub use topics::{fit_topics, top_words, Corpus, LdaParams, TopicModel};

use serde::{Deserialize, Serialize};

use crate::domain::{Session, SessionId, Timestamp};
use crate::metrics::Evaluator;
use crate::scalar::Real;

/// Sentiment of one student message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SentimentPoint<T> {
    pub session_id: SessionId,
    pub pseudonym: String,
    pub timestamp: Timestamp,
    pub sentiment: T,
}

/// Student-message sentiment over time, session by session in transcript
/// order.
pub fn sentiment_timeline<'a, T: Real>(
    sessions: impl IntoIterator<Item = &'a Session>,
    evaluator: &Evaluator,
) -> Vec<SentimentPoint<T>> {
    sessions
        .into_iter()
        .flat_map(|s| {
            s.messages()
                .iter()
                .filter(|m| m.author.is_student())
                .map(move |m| SentimentPoint {
                    session_id: s.id().clone(),
                    pseudonym: s.pseudonym().to_owned(),
                    timestamp: m.timestamp,
                    sentiment: evaluator.sentiment(&m.text),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BotRole, Condition, Message};

    #[test]
    fn timeline_covers_student_messages_only() {
        let mut s = Session::with_id("s".into(), "p-1", Condition::MultiRole, 0).unwrap();
        s.append(Message::student("s".into(), "I am so stressed", 1)).unwrap();
        s.append(Message::bot("s".into(), BotRole::EmotionalSupporter, "great job", 2)).unwrap();
        s.append(Message::student("s".into(), "thanks, that was helpful", 3)).unwrap();
        let points: Vec<SentimentPoint<f64>> = sentiment_timeline([&s], &Evaluator::shipped());
        assert_eq!(points.len(), 2);
        assert!(points[0].sentiment < 0.0);
        assert!(points[1].sentiment > 0.0);
        assert_eq!(points[1].timestamp, 3);
    }
}
