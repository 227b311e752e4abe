//! Click/message sequences per participant, their first-order transition
//! matrix, and category-coded plot data.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::domain::{BotRole, Timestamp};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Page {
    Homepage,
    Level1,
    Level2,
    Level3,
    ChatbotPage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    PageClick { page: Page },
    MessageSent { role: BotRole },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub pseudonym: String,
    pub timestamp: Timestamp,
    pub kind: EventKind,
}

/// The five plotted categories. Codes are stable and written into the plot
/// file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCategory {
    Homepage,
    Level1,
    Level2,
    Level3,
    Chatbot,
}

impl EventCategory {
    pub const ALL: [EventCategory; 5] = [
        EventCategory::Homepage,
        EventCategory::Level1,
        EventCategory::Level2,
        EventCategory::Level3,
        EventCategory::Chatbot,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EventCategory::Homepage => "homepage",
            EventCategory::Level1 => "level1",
            EventCategory::Level2 => "level2",
            EventCategory::Level3 => "level3",
            EventCategory::Chatbot => "chatbot",
        }
    }
}

impl fmt::Display for EventCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl EventKind {
    /// Messages and chatbot-page clicks both land in `Chatbot`.
    pub fn category(self) -> EventCategory {
        match self {
            EventKind::PageClick { page } => match page {
                Page::Homepage => EventCategory::Homepage,
                Page::Level1 => EventCategory::Level1,
                Page::Level2 => EventCategory::Level2,
                Page::Level3 => EventCategory::Level3,
                Page::ChatbotPage => EventCategory::Chatbot,
            },
            EventKind::MessageSent { .. } => EventCategory::Chatbot,
        }
    }
}

/// Per-pseudonym event sequences, keyed in pseudonym order.
pub type Sequences = BTreeMap<String, Vec<InteractionEvent>>;

/// Groups events by pseudonym and sorts each group by timestamp; events with
/// equal timestamps keep their input order.
pub fn build_sequences(events: &[InteractionEvent]) -> Sequences {
    let mut out: Sequences = BTreeMap::new();
    for e in events {
        out.entry(e.pseudonym.clone()).or_default().push(e.clone());
    }
    for seq in out.values_mut() {
        seq.sort_by_key(|e| e.timestamp);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TransitionMatrix<T> {
    pub categories: Vec<EventCategory>,
    pub counts: Vec<Vec<usize>>,
    /// Row-stochastic where `observed`; all-zero rows otherwise.
    pub probabilities: Vec<Vec<T>>,
    pub observed: Vec<bool>,
}

impl<T: Real> TransitionMatrix<T> {
    pub fn probability(&self, from: EventCategory, to: EventCategory) -> T {
        self.probabilities[from.code()][to.code()]
    }

    pub fn transitions(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

/// Maximum-likelihood first-order transitions between event categories.
pub fn transition_matrix<T: Real>(sequences: &Sequences) -> Result<TransitionMatrix<T>> {
    let n = EventCategory::ALL.len();
    let mut counts = vec![vec![0usize; n]; n];
    for seq in sequences.values() {
        for pair in seq.windows(2) {
            counts[pair[0].kind.category().code()][pair[1].kind.category().code()] += 1;
        }
    }
    let total: usize = counts.iter().flatten().sum();
    if total == 0 {
        return Err(Error::validation("no transitions in the given sequences"));
    }
    let mut probabilities = vec![vec![T::zero(); n]; n];
    let mut observed = vec![false; n];
    for (i, row) in counts.iter().enumerate() {
        let row_total: usize = row.iter().sum();
        if row_total == 0 {
            continue;
        }
        observed[i] = true;
        for (j, &c) in row.iter().enumerate() {
            probabilities[i][j] = T::from_count(c) / T::from_count(row_total);
        }
    }
    Ok(TransitionMatrix {
        categories: EventCategory::ALL.to_vec(),
        counts,
        probabilities,
        observed,
    })
}

/// Header line declaring the category codes.
pub fn plot_header() -> String {
    let codes: Vec<String> = EventCategory::ALL
        .iter()
        .map(|c| format!("{}={}", c.code(), c.name()))
        .collect();
    format!("# category_code: {}\nuser_index,click_index,category_code\n", codes.join(","))
}

/// One CSV row per event: users are indexed in pseudonym order, clicks from 0.
pub fn export_sequence_plot(sequences: &Sequences) -> String {
    let mut out = plot_header();
    for (user, seq) in sequences.values().enumerate() {
        for (click, e) in seq.iter().enumerate() {
            let _ = writeln!(out, "{user},{click},{}", e.kind.category().code());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn click(p: &str, t: u64, page: Page) -> InteractionEvent {
        InteractionEvent {
            pseudonym: p.into(),
            timestamp: t,
            kind: EventKind::PageClick { page },
        }
    }

    fn seqs(pages: &[Page]) -> Sequences {
        let events: Vec<_> = pages
            .iter()
            .enumerate()
            .map(|(i, &p)| click("u", i as u64, p))
            .collect();
        build_sequences(&events)
    }

    #[test]
    fn event_wire_format() {
        let e = InteractionEvent {
            pseudonym: "p-1".into(),
            timestamp: 5,
            kind: EventKind::MessageSent {
                role: BotRole::Peer,
            },
        };
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"{"pseudonym":"p-1","timestamp":5,"kind":{"type":"message_sent","role":"peer"}}"#
        );
        let c = serde_json::to_string(&click("p", 1, Page::Level2)).unwrap();
        assert!(c.contains(r#"{"type":"page_click","page":"level2"}"#));
    }

    #[test]
    fn empty_events_give_no_sequences() {
        assert!(build_sequences(&[]).is_empty());
    }

    #[test]
    fn sequences_are_sorted_per_user() {
        let s = build_sequences(&[click("u", 2, Page::Level1), click("u", 1, Page::Homepage)]);
        let ts: Vec<_> = s["u"].iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, [1, 2]);
    }

    #[test]
    fn interleaved_users_keep_their_order() {
        let s = build_sequences(&[
            click("a", 1, Page::Homepage),
            click("b", 1, Page::Level1),
            click("a", 3, Page::Level2),
            click("b", 2, Page::Level3),
        ]);
        assert_eq!(s.len(), 2);
        assert_eq!(
            s["a"].iter().map(|e| e.kind).collect::<Vec<_>>(),
            [
                EventKind::PageClick { page: Page::Homepage },
                EventKind::PageClick { page: Page::Level2 }
            ]
        );
        assert_eq!(s["b"].len(), 2);
    }

    #[test]
    fn single_transition() {
        let m: TransitionMatrix<f64> =
            transition_matrix(&seqs(&[Page::Homepage, Page::ChatbotPage])).unwrap();
        assert_eq!(m.probability(EventCategory::Homepage, EventCategory::Chatbot), 1.0);
        assert!(m.observed[0]);
        assert!(!m.observed[EventCategory::Chatbot.code()]);
        assert!(m.probabilities[EventCategory::Chatbot.code()].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn alternating_sequence() {
        let m: TransitionMatrix<f64> =
            transition_matrix(&seqs(&[Page::Level1, Page::Level2, Page::Level1, Page::Level2]))
                .unwrap();
        assert_eq!(m.probability(EventCategory::Level1, EventCategory::Level2), 1.0);
        assert_eq!(m.probability(EventCategory::Level2, EventCategory::Level1), 1.0);
    }

    #[test]
    fn no_transitions_is_an_error() {
        assert!(transition_matrix::<f64>(&seqs(&[Page::Homepage])).is_err());
        assert!(transition_matrix::<f64>(&Sequences::new()).is_err());
    }

    #[test]
    fn plot_export() {
        assert_eq!(export_sequence_plot(&Sequences::new()), plot_header());
        let s = build_sequences(&[
            click("u", 1, Page::Homepage),
            click("u", 2, Page::Level1),
            InteractionEvent {
                pseudonym: "u".into(),
                timestamp: 3,
                kind: EventKind::MessageSent { role: BotRole::Instructor },
            },
        ]);
        let csv = export_sequence_plot(&s);
        let rows: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(rows, ["0,0,0", "0,1,1", "0,2,4"]);
        assert!(csv.starts_with("# category_code: 0=homepage,1=level1,2=level2,3=level3,4=chatbot\n"));
    }

    fn any_event() -> impl Strategy<Value = InteractionEvent> {
        let page = prop_oneof![
            Just(Page::Homepage),
            Just(Page::Level1),
            Just(Page::Level2),
            Just(Page::Level3),
            Just(Page::ChatbotPage),
        ];
        ("[a-c]", 0u64..20, page).prop_map(|(p, t, page)| click(&p, t, page))
    }

    proptest! {
        #[test]
        fn no_event_is_lost(events in prop::collection::vec(any_event(), 0..60)) {
            let s = build_sequences(&events);
            let mut flat: Vec<_> = s.into_values().flatten().collect();
            let mut input = events.clone();
            let key = |e: &InteractionEvent| (e.pseudonym.clone(), e.timestamp, e.kind.category());
            flat.sort_by_key(key);
            input.sort_by_key(key);
            prop_assert_eq!(flat, input);
        }

        #[test]
        fn observed_rows_are_stochastic(events in prop::collection::vec(any_event(), 2..80)) {
            let s = build_sequences(&events);
            if let Ok(m) = transition_matrix::<f64>(&s) {
                for (row, seen) in m.probabilities.iter().zip(&m.observed) {
                    let sum: f64 = row.iter().sum();
                    if *seen {
                        prop_assert!((sum - 1.0).abs() <= 1e-12);
                    } else {
                        prop_assert_eq!(sum, 0.0);
                    }
                }
            }
        }
    }
}
