//! Batch scoring of a Q&A dataset with optional human rubric scores.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tutorbots_core::metrics::{aggregate_by_level, rubric_correlations, Evaluator, QaKind, QaPair};
use tutorbots_core::{BloomLevel, DimensionCorrelation, LevelAggregate, MetricReport, RubricScores};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} has no usable lines")]
    Empty(&'static str),
    #[error("{source_name} line {line}: {message}")]
    Line {
        source_name: &'static str,
        line: usize,
        message: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One rubric line: the dataset line it scores plus any of the five
/// dimensions.
#[derive(Debug, Clone, Deserialize)]
struct RubricRow {
    line: usize,
    #[serde(flatten)]
    scores: RubricScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    /// 1-based line in the dataset file.
    pub line: usize,
    pub bloom: BloomLevel,
    pub kind: QaKind,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedLine {
    pub source: String,
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pairs: Vec<PairReport>,
    /// Per-Bloom-level means, ordered by level.
    pub levels: Vec<LevelAggregate>,
    pub correlations: Vec<DimensionCorrelation>,
    pub skipped: Vec<SkippedLine>,
}

struct Lines<'a> {
    source_name: &'static str,
    strict: bool,
    skipped: &'a mut Vec<SkippedLine>,
}

impl Lines<'_> {
    /// In strict mode the first failure aborts; otherwise it is recorded and
    /// the line dropped.
    fn check<T>(&mut self, line: usize, result: Result<T, String>) -> Result<Option<T>, EvalError> {
        match result {
            Ok(v) => Ok(Some(v)),
            Err(message) if self.strict => Err(EvalError::Line {
                source_name: self.source_name,
                line,
                message,
            }),
            Err(message) => {
                self.skipped.push(SkippedLine {
                    source: self.source_name.into(),
                    line,
                    error: message,
                });
                Ok(None)
            }
        }
    }
}

fn numbered(raw: &str) -> impl Iterator<Item = (usize, &str)> {
    raw.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Scores every pair in `dataset` (JSON lines of [`QaPair`]) and attaches
/// rubric rows from `rubric` by dataset line number.
pub fn eval_batch(
    evaluator: &Evaluator,
    dataset: &str,
    rubric: Option<&str>,
    strict: bool,
) -> Result<EvalReport, EvalError> {
    let mut skipped = Vec::new();

    let mut rubric_rows: BTreeMap<usize, RubricScores> = BTreeMap::new();
    if let Some(raw) = rubric {
        let mut lines = Lines {
            source_name: "rubric",
            strict,
            skipped: &mut skipped,
        };
        for (n, l) in numbered(raw) {
            let row = serde_json::from_str::<RubricRow>(l)
                .map_err(|e| e.to_string())
                .and_then(|r| r.scores.validate().map(|_| r).map_err(|e| e.to_string()));
            if let Some(row) = lines.check(n, row)? {
                rubric_rows.insert(row.line, row.scores);
            }
        }
    }

    let mut pairs = Vec::new();
    let mut lines = Lines {
        source_name: "dataset",
        strict,
        skipped: &mut skipped,
    };
    for (n, l) in numbered(dataset) {
        let scored = serde_json::from_str::<QaPair>(l)
            .map_err(|e| e.to_string())
            .and_then(|pair| {
                evaluator
                    .evaluate(&pair, rubric_rows.remove(&n))
                    .map(|report| PairReport {
                        line: n,
                        bloom: pair.bloom,
                        kind: pair.kind,
                        report,
                    })
                    .map_err(|e| e.to_string())
            });
        if let Some(p) = lines.check(n, scored)? {
            pairs.push(p);
        }
    }
    if pairs.is_empty() {
        return Err(EvalError::Empty("dataset"));
    }

    let mut lines = Lines {
        source_name: "rubric",
        strict,
        skipped: &mut skipped,
    };
    for line in rubric_rows.into_keys() {
        lines.check::<()>(line, Err(format!("no scored dataset pair at line {line}")))?;
    }

    let levels: Vec<BloomLevel> = pairs.iter().map(|p| p.bloom).collect();
    let reports: Vec<MetricReport> = pairs.iter().map(|p| p.report.clone()).collect();
    Ok(EvalReport {
        levels: aggregate_by_level(&levels, &reports),
        correlations: rubric_correlations(&reports),
        pairs,
        skipped,
    })
}

pub fn eval_batch_files(
    evaluator: &Evaluator,
    dataset: &Path,
    rubric: Option<&Path>,
    strict: bool,
) -> Result<EvalReport, EvalError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| EvalError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let dataset = read(dataset)?;
    let rubric = rubric.map(read).transpose()?;
    eval_batch(evaluator, &dataset, rubric.as_deref(), strict)
}

#[derive(Serialize)]
struct LevelRow<'a> {
    bloom: u8,
    level: &'a str,
    count: usize,
    accuracy: Option<f64>,
    accuracy_count: usize,
    fluency_ari: f64,
    fluency_norm: f64,
    empathy: f64,
    engagement: f64,
    relevance: f64,
}

#[derive(Serialize)]
struct PairRow {
    line: usize,
    bloom: u8,
    kind: QaKind,
    accuracy: Option<f64>,
    fluency_ari: f64,
    fluency_norm: f64,
    empathy: f64,
    engagement: f64,
    relevance: f64,
}

fn to_csv<R: Serialize>(rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

impl EvalReport {
    /// The per-level aggregate table; empty accuracy cells mean no pair at
    /// that level had an accuracy score.
    pub fn levels_csv(&self) -> String {
        to_csv(self.levels.iter().map(|a| LevelRow {
            bloom: a.bloom.ordinal(),
            level: a.bloom.name(),
            count: a.count,
            accuracy: a.accuracy,
            accuracy_count: a.accuracy_count,
            fluency_ari: a.fluency_ari,
            fluency_norm: a.fluency_norm,
            empathy: a.empathy,
            engagement: a.engagement,
            relevance: a.relevance,
        }))
    }

    pub fn pairs_csv(&self) -> String {
        to_csv(self.pairs.iter().map(|p| PairRow {
            line: p.line,
            bloom: p.bloom.ordinal(),
            kind: p.kind,
            accuracy: p.report.accuracy,
            fluency_ari: p.report.fluency_ari,
            fluency_norm: p.report.fluency_norm,
            empathy: p.report.empathy,
            engagement: p.report.engagement,
            relevance: p.report.relevance,
        }))
    }
}
