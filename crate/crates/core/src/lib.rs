//! Core of a multi-role tutoring chatbot: the inquiry router (Chatbot
//! Manager), the four role agents, the five-dimension response metric and the
//! interaction analytics.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which is what the service and reports use.

pub mod agents;
pub mod analytics;
pub mod domain;
pub mod error;
pub mod metrics;
pub mod router;
pub mod scalar;
pub mod text;

pub use domain::{
    append_message, make_session, Author, BloomLevel, BotRole, Category, Condition,
    InquiryClassification, Message, MessageId, Session, SessionId, Timestamp,
};
pub use error::{Error, Result};
pub use router::{classify_inquiry, route, tie_break, RouterLexicon, RoutingDecision};
pub use scalar::Real;

pub type MetricReport = metrics::MetricReport<f64>;
pub type RubricScores = metrics::RubricScores<f64>;
pub type LevelAggregate = metrics::LevelAggregate<f64>;
pub type DimensionCorrelation = metrics::DimensionCorrelation<f64>;
pub type TopicModel = analytics::TopicModel<f64>;
pub type LdaParams = analytics::LdaParams<f64>;
pub type TransitionMatrix = analytics::TransitionMatrix<f64>;
pub type SentimentPoint = analytics::SentimentPoint<f64>;
