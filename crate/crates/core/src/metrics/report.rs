use serde::{Deserialize, Serialize};

use crate::domain::BloomLevel;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QaKind {
    #[serde(rename = "free_qa", alias = "FreeQA", alias = "free-qa")]
    FreeQa,
    #[serde(rename = "code_check", alias = "CodeCheck", alias = "code-check")]
    CodeCheck,
}

/// A question with the chatbot's answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaPair {
    pub question: String,
    pub answer: String,
    pub bloom: BloomLevel,
    pub kind: QaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

impl QaPair {
    pub fn validate(&self) -> Result<()> {
        if self.kind == QaKind::CodeCheck
            && self.reference.as_deref().is_none_or(|r| r.trim().is_empty())
        {
            return Err(Error::validation("code-check pairs need a reference solution"));
        }
        if self.question.trim().is_empty() {
            return Err(Error::validation("question is empty"));
        }
        if self.answer.trim().is_empty() {
            return Err(Error::validation("answer is empty"));
        }
        Ok(())
    }
}

/// The five quality dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Accuracy,
    Fluency,
    Empathy,
    Engagement,
    Relevance,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Accuracy,
        Dimension::Fluency,
        Dimension::Empathy,
        Dimension::Engagement,
        Dimension::Relevance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Accuracy => "accuracy",
            Dimension::Fluency => "fluency",
            Dimension::Empathy => "empathy",
            Dimension::Engagement => "engagement",
            Dimension::Relevance => "relevance",
        }
    }
}

/// Human rubric scores (expert screening / researcher coding) for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RubricScores<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluency: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empathy: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engagement: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance: Option<T>,
}

impl<T: Real> RubricScores<T> {
    pub fn get(&self, dim: Dimension) -> Option<T> {
        match dim {
            Dimension::Accuracy => self.accuracy,
            Dimension::Fluency => self.fluency,
            Dimension::Empathy => self.empathy,
            Dimension::Engagement => self.engagement,
            Dimension::Relevance => self.relevance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for dim in Dimension::ALL {
            if let Some(v) = self.get(dim) {
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::validation(format!(
                        "rubric {} score {v} outside [0, 1]",
                        dim.as_str()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Automated scores for one pair, with the optional human overlay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MetricReport<T> {
    /// Absent for free-form answers without a reference.
    pub accuracy: Option<T>,
    pub fluency_ari: T,
    pub fluency_norm: T,
    pub empathy: T,
    pub engagement: T,
    pub relevance: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_scores: Option<RubricScores<T>>,
}

impl<T: Real> MetricReport<T> {
    /// The automated value compared against the rubric for `dim`; fluency uses
    /// the normalized ARI.
    pub fn automated(&self, dim: Dimension) -> Option<T> {
        match dim {
            Dimension::Accuracy => self.accuracy,
            Dimension::Fluency => Some(self.fluency_norm),
            Dimension::Empathy => Some(self.empathy),
            Dimension::Engagement => Some(self.engagement),
            Dimension::Relevance => Some(self.relevance),
        }
    }
}

/// Sample Pearson correlation. `None` with fewer than two points or when
/// either side has zero variance.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp_to(-T::one(), T::one()))
}

/// Rubric-vs-automated correlation for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DimensionCorrelation<T> {
    pub dimension: Dimension,
    /// Pairs where both a rubric and an automated score exist.
    pub n: usize,
    pub pearson: Option<T>,
}

pub fn rubric_correlations<T: Real>(reports: &[MetricReport<T>]) -> Vec<DimensionCorrelation<T>> {
    Dimension::ALL
        .into_iter()
        .map(|dim| {
            let (xs, ys): (Vec<T>, Vec<T>) = reports
                .iter()
                .filter_map(|r| {
                    let human = r.human_scores.as_ref()?.get(dim)?;
                    Some((r.automated(dim)?, human))
                })
                .unzip();
            DimensionCorrelation {
                dimension: dim,
                n: xs.len(),
                pearson: pearson(&xs, &ys),
            }
        })
        .collect()
}

/// Mean of each dimension over the pairs at one Bloom level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevelAggregate<T> {
    pub bloom: BloomLevel,
    pub count: usize,
    /// Mean over pairs that have an accuracy score; `None` if none do.
    pub accuracy: Option<T>,
    pub accuracy_count: usize,
    pub fluency_ari: T,
    pub fluency_norm: T,
    pub empathy: T,
    pub engagement: T,
    pub relevance: T,
}

/// Groups reports by the Bloom level of their pair; levels without pairs are
/// omitted. Output is ordered by level.
pub fn aggregate_by_level<T: Real>(
    levels: &[BloomLevel],
    reports: &[MetricReport<T>],
) -> Vec<LevelAggregate<T>> {
    assert_eq!(levels.len(), reports.len(), "one level per report");
    BloomLevel::ALL
        .into_iter()
        .filter_map(|level| {
            let group: Vec<&MetricReport<T>> = levels
                .iter()
                .zip(reports)
                .filter(|(l, _)| **l == level)
                .map(|(_, r)| r)
                .collect();
            if group.is_empty() {
                return None;
            }
            let n = T::from_count(group.len());
            let mean = |f: fn(&MetricReport<T>) -> T| group.iter().map(|r| f(r)).sum::<T>() / n;
            let acc: Vec<T> = group.iter().filter_map(|r| r.accuracy).collect();
            Some(LevelAggregate {
                bloom: level,
                count: group.len(),
                accuracy: (!acc.is_empty())
                    .then(|| acc.iter().copied().sum::<T>() / T::from_count(acc.len())),
                accuracy_count: acc.len(),
                fluency_ari: mean(|r| r.fluency_ari),
                fluency_norm: mean(|r| r.fluency_norm),
                empathy: mean(|r| r.empathy),
                engagement: mean(|r| r.engagement),
                relevance: mean(|r| r.relevance),
            })
        })
        .collect()
}
