//! Example-level correctness and specificity metrics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;

/// `Correct` and `PrecisionInfo` measure correctness (non-increasing with
/// prediction depth); `Exact` and `RecallInfo` measure specificity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Correct,
    Exact,
    PrecisionInfo,
    RecallInfo,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Correct,
        MetricKind::Exact,
        MetricKind::PrecisionInfo,
        MetricKind::RecallInfo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Correct => "correct",
            MetricKind::Exact => "exact",
            MetricKind::PrecisionInfo => "precision",
            MetricKind::RecallInfo => "recall",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correct" => Ok(MetricKind::Correct),
            "exact" => Ok(MetricKind::Exact),
            "precision" | "precision_info" => Ok(MetricKind::PrecisionInfo),
            "recall" | "recall_info" => Ok(MetricKind::RecallInfo),
            _ => Err(Error::UnknownName {
                kind: "metric",
                name: s.to_owned(),
                options: "correct, exact, precision, recall",
            }),
        }
    }
}

/// Replaces a prediction strictly below the ground truth by the truth itself.
/// Predicting a subclass of the label is not counted as an error.
pub fn effective_prediction(h: &Hierarchy, truth: usize, pred: usize) -> Result<usize> {
    h.check_node(truth)?;
    h.check_node(pred)?;
    if pred != truth && h.is_ancestor(truth, pred) {
        Ok(truth)
    } else {
        Ok(pred)
    }
}

/// Evaluates one metric for a (truth, prediction) pair.
///
/// Callers are expected to have applied [`effective_prediction`] first.
/// `Correct` and `Exact` return {0, 1}; the information-based precision and
/// recall lie in [0, 1]. Precision at an uninformative prediction (the root)
/// is defined as 1 by the 0/0 -> 1 convention. Recall is a domain error for
/// root-labeled examples, whose information content is zero.
pub fn evaluate(h: &Hierarchy, kind: MetricKind, truth: usize, pred: usize) -> Result<f64> {
    h.check_node(truth)?;
    h.check_node(pred)?;
    Ok(match kind {
        MetricKind::Correct => {
            if h.is_ancestor(pred, truth) {
                1.0
            } else {
                0.0
            }
        }
        MetricKind::Exact => {
            if pred == truth {
                1.0
            } else {
                0.0
            }
        }
        MetricKind::PrecisionInfo => {
            if h.info(pred) == 0.0 {
                1.0
            } else {
                h.info(h.lca(truth, pred)?) / h.info(pred)
            }
        }
        MetricKind::RecallInfo => {
            if h.info(truth) == 0.0 {
                return Err(Error::RecallOfRoot);
            }
            h.info(h.lca(truth, pred)?) / h.info(truth)
        }
    })
}
