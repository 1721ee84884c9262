//! Prediction rules mapping a per-node likelihood vector to a single node.
//!
//! All rules break ties deterministically: more likely first, then lower
//! node index. For a valid likelihood (parent mass at least the children's
//! sum) the confidence-threshold rule with `tau >= 0.5` selects along a
//! single root-down path, so raising the threshold can only move the
//! prediction towards the root.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::likelihood::exclusive_likelihood;
use crate::metrics::{effective_prediction, evaluate, MetricKind};
use crate::util::{check_finite, check_len, Matrix};

/// Cost table for conditional risk minimisation: `cost(truth, prediction)`.
#[derive(Debug, Clone)]
pub enum CostKind {
    /// `C(u, y) = -[y is an ancestor of u] * info(y)`: the negated expected
    /// information reward of a correct prediction.
    NegInfoReward,
    /// Explicit `|Y| x |Y|` table indexed `(truth, prediction)`.
    Table(Matrix),
}

/// Whether CRM optimises and marginalises over leaves only or over all nodes
/// (the latter via the exclusive likelihood).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostDomain {
    Leaves,
    AllNodes,
}

impl FromStr for CostDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leaves" => Ok(CostDomain::Leaves),
            "all_nodes" => Ok(CostDomain::AllNodes),
            _ => Err(Error::UnknownName {
                kind: "cost domain",
                name: s.to_owned(),
                options: "leaves, all_nodes",
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub enum InferenceSpec {
    ConfidenceThreshold { tau: f64 },
    Majority,
    Plurality,
    Leaf,
    InfoThreshold { zeta: f64 },
    ExpectedInfo { lambda: f64 },
    Crm { cost: CostKind, over: CostDomain },
}

impl InferenceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            InferenceSpec::ConfidenceThreshold { .. } => "confidence_threshold",
            InferenceSpec::Majority => "majority",
            InferenceSpec::Plurality => "plurality",
            InferenceSpec::Leaf => "leaf",
            InferenceSpec::InfoThreshold { .. } => "info_threshold",
            InferenceSpec::ExpectedInfo { .. } => "expected_info",
            InferenceSpec::Crm { .. } => "crm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperParameter(msg));
        match self {
            InferenceSpec::ConfidenceThreshold { tau } if !(0.0..1.0).contains(tau) => {
                bad(format!("tau must lie in [0, 1), got {tau}"))
            }
            InferenceSpec::InfoThreshold { zeta } if !(*zeta >= 0.0) => {
                bad(format!("zeta must be >= 0, got {zeta}"))
            }
            InferenceSpec::ExpectedInfo { lambda } if !(*lambda >= 0.0) => {
                bad(format!("lambda must be >= 0, got {lambda}"))
            }
            _ => Ok(()),
        }
    }
}

fn check_p(h: &Hierarchy, p: &[f64]) -> Result<()> {
    check_len(p, h.num_nodes())?;
    check_finite(p)
}

/// Maximum-information node whose likelihood strictly exceeds `tau`;
/// falls back to the root when no node passes.
pub fn infer_confidence_threshold(h: &Hierarchy, p: &[f64], tau: f64) -> Result<usize> {
    check_p(h, p)?;
    let mut best: Option<usize> = None;
    for y in 0..h.num_nodes() {
        if p[y] > tau {
            best = Some(match best {
                None => y,
                Some(b) => {
                    if h.info(y) > h.info(b) || (h.info(y) == h.info(b) && p[y] > p[b]) {
                        y
                    } else {
                        b
                    }
                }
            });
        }
    }
    Ok(best.unwrap_or(h.root()))
}

/// Confidence-threshold inference at `tau = 0.5`.
pub fn infer_majority(h: &Hierarchy, p: &[f64]) -> Result<usize> {
    infer_confidence_threshold(h, p, 0.5)
}

/// Maximum-information node strictly more likely than every non-ancestor;
/// falls back to the root when no node strictly dominates.
pub fn infer_plurality(h: &Hierarchy, p: &[f64]) -> Result<usize> {
    check_p(h, p)?;
    let n = h.num_nodes();
    let mut best: Option<usize> = None;
    for y in 0..n {
        let dominates = (0..n).all(|u| h.is_ancestor(u, y) || p[y] > p[u]);
        if !dominates {
            continue;
        }
        best = Some(match best {
            None => y,
            Some(b) => {
                if h.info(y) > h.info(b) || (h.info(y) == h.info(b) && p[y] > p[b]) {
                    y
                } else {
                    b
                }
            }
        });
    }
    Ok(best.unwrap_or(h.root()))
}

/// Most likely leaf.
pub fn infer_leaf(h: &Hierarchy, p: &[f64]) -> Result<usize> {
    check_p(h, p)?;
    let mut best = h.leaves()[0];
    for &y in h.leaves() {
        if p[y] > p[best] {
            best = y;
        }
    }
    Ok(best)
}

/// Most likely node among those with information at least `zeta`.
pub fn infer_info_threshold(h: &Hierarchy, p: &[f64], zeta: f64) -> Result<usize> {
    check_p(h, p)?;
    let mut best: Option<usize> = None;
    for y in 0..h.num_nodes() {
        if h.info(y) >= zeta {
            best = Some(match best {
                None => y,
                Some(b) => {
                    if p[y] > p[b] {
                        y
                    } else {
                        b
                    }
                }
            });
        }
    }
    best.ok_or(Error::InfoThresholdUnattainable {
        zeta,
        max: (h.num_leaves() as f64).ln(),
    })
}

/// Maximiser of the transformed expected reward `(info(y) + lambda) p(y)`.
pub fn infer_expected_info(h: &Hierarchy, p: &[f64], lambda: f64) -> Result<usize> {
    check_p(h, p)?;
    let score = |y: usize| (h.info(y) + lambda) * p[y];
    let mut best = 0;
    for y in 1..h.num_nodes() {
        if score(y) > score(best) || (score(y) == score(best) && p[y] > p[best]) {
            best = y;
        }
    }
    Ok(best)
}

/// Conditional risk minimisation: the node minimising the expected cost
/// under the predicted distribution.
///
/// Over leaves the expectation uses the leaf likelihoods directly; over all
/// nodes it uses the exclusive likelihood, which requires `p` to satisfy the
/// parent-sum validity within 1e-9.
pub fn infer_crm(h: &Hierarchy, p: &[f64], cost: &CostKind, over: CostDomain) -> Result<usize> {
    check_p(h, p)?;
    if let CostKind::Table(t) = cost {
        if t.rows() != h.num_nodes() || t.cols() != h.num_nodes() {
            return Err(Error::DimMismatch {
                expected: h.num_nodes() * h.num_nodes(),
                got: t.rows() * t.cols(),
            });
        }
        check_finite(t.data())?;
    }
    match over {
        CostDomain::Leaves => {
            let risk = |y: usize| -> f64 {
                match cost {
                    CostKind::NegInfoReward => {
                        // Only u = y contributes: a leaf is an ancestor of a
                        // leaf u iff they are equal.
                        -h.info(y) * p[y]
                    }
                    CostKind::Table(t) => h.leaves().iter().map(|&u| t.get(u, y) * p[u]).sum(),
                }
            };
            let mut best = h.leaves()[0];
            for &y in h.leaves() {
                if risk(y) < risk(best) {
                    best = y;
                }
            }
            Ok(best)
        }
        CostDomain::AllNodes => {
            let excl = exclusive_likelihood(h, p)?;
            let risk: Vec<f64> = match cost {
                CostKind::NegInfoReward => {
                    // sum_{u in D(y)} excl(u) is the event mass of y
                    let mass = h.sum_over_descendants(&excl)?;
                    (0..h.num_nodes()).map(|y| -h.info(y) * mass[y]).collect()
                }
                CostKind::Table(t) => (0..h.num_nodes())
                    .map(|y| (0..h.num_nodes()).map(|u| t.get(u, y) * excl[u]).sum())
                    .collect(),
            };
            let mut best = 0;
            for y in 1..h.num_nodes() {
                if risk[y] < risk[best] {
                    best = y;
                }
            }
            Ok(best)
        }
    }
}

/// Applies the rule described by `spec` to one likelihood vector.
pub fn infer(h: &Hierarchy, p: &[f64], spec: &InferenceSpec) -> Result<usize> {
    spec.validate()?;
    match spec {
        InferenceSpec::ConfidenceThreshold { tau } => infer_confidence_threshold(h, p, *tau),
        InferenceSpec::Majority => infer_majority(h, p),
        InferenceSpec::Plurality => infer_plurality(h, p),
        InferenceSpec::Leaf => infer_leaf(h, p),
        InferenceSpec::InfoThreshold { zeta } => infer_info_threshold(h, p, *zeta),
        InferenceSpec::ExpectedInfo { lambda } => infer_expected_info(h, p, *lambda),
        InferenceSpec::Crm { cost, over } => infer_crm(h, p, cost, *over),
    }
}

/// Grid-plus-bisection search for the `lambda` whose expected-information
/// predictions reach a target mean correctness on a held-out set.
///
/// Mean correctness is not guaranteed monotone in `lambda`, so this returns
/// the best candidate evaluated within the budget, not an exact solution.
pub fn search_lambda_for_correct(
    h: &Hierarchy,
    labels: &[usize],
    probs: &Matrix,
    target: f64,
    grid_points: usize,
    bisect_iters: usize,
) -> Result<(f64, f64)> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if probs.rows() != labels.len() || probs.cols() != h.num_nodes() {
        return Err(Error::DimMismatch {
            expected: labels.len() * h.num_nodes(),
            got: probs.rows() * probs.cols(),
        });
    }
    let mean_correct = |lambda: f64| -> Result<f64> {
        let mut total = 0.0;
        for (i, &y) in labels.iter().enumerate() {
            let pred = infer_expected_info(h, probs.row(i), lambda)?;
            let pred = effective_prediction(h, y, pred)?;
            total += evaluate(h, MetricKind::Correct, y, pred)?;
        }
        Ok(total / labels.len() as f64)
    };

    // Geometric grid over 1 + lambda, starting at lambda = 0.
    let grid_points = grid_points.max(2);
    let max_lambda: f64 = 1e6;
    let mut grid = vec![0.0];
    for k in 1..grid_points {
        let t = k as f64 / (grid_points - 1) as f64;
        grid.push((1.0 + max_lambda).powf(t) - 1.0);
    }
    let scores: Vec<f64> = grid.iter().map(|&l| mean_correct(l)).collect::<Result<_>>()?;

    let mut best = (grid[0], scores[0]);
    for (&l, &s) in grid.iter().zip(&scores) {
        if (s - target).abs() < (best.1 - target).abs() {
            best = (l, s);
        }
    }
    // Refine inside the first bracket that straddles the target.
    for w in 0..grid.len() - 1 {
        if (scores[w] - target) * (scores[w + 1] - target) <= 0.0 {
            let (mut lo, mut hi) = (grid[w], grid[w + 1]);
            for _ in 0..bisect_iters {
                let mid = ((1.0 + lo) * (1.0 + hi)).sqrt() - 1.0;
                let s = mean_correct(mid)?;
                if (s - target).abs() < (best.1 - target).abs() {
                    best = (mid, s);
                }
                if (s - target) * (scores[w] - target) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            break;
        }
    }
    Ok(best)
}
