//! Operating-characteristic construction.
//!
//! For a single example, the set of predictions reachable by confidence
//! thresholding is the Pareto set of nodes in the (confidence, information)
//! plane. A dataset-level metric is then a piecewise-constant function of
//! the threshold, assembled by merging each example's ordered Pareto trace.


use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::inference::{infer, InferenceSpec};
use crate::metrics::{effective_prediction, evaluate, MetricKind};
use crate::util::{check_finite, check_len, Matrix};

/// Indices of the Pareto-maximal points of `(x, y)`, one representative per
/// information level, ordered by descending `x` then ascending `y`.
///
/// Mirrors the maxima-of-a-point-set routine: stable-sort descending by `y`,
/// stable-sort descending by `x` (so equal `x` keeps the descending-`y`
/// order), then keep positions whose `y` strictly exceeds the running
/// maximum of all preceding positions.
pub fn ordered_pareto_set(x: &[f64], y: &[f64]) -> Result<Vec<usize>> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    check_finite(x)?;
    check_finite(y)?;
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap());
    order.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap());
    let mut keep = Vec::new();
    let mut running_max = f64::NEG_INFINITY;
    for &i in &order {
        if keep.is_empty() || y[i] > running_max {
            keep.push(i);
        }
        running_max = running_max.max(y[i]);
    }
    Ok(keep)
}

/// Ordered Pareto set of one example with per-metric values.
#[derive(Debug, Clone)]
pub struct ParetoTrace {
    /// Reachable predictions, most confident first.
    pub nodes: Vec<usize>,
    /// Likelihood of each prediction; strictly decreasing.
    pub scores: Vec<f64>,
    /// `values[m][k]`: metric `m` evaluated at prediction `k`, after the
    /// below-truth replacement rule.
    pub values: Vec<Vec<f64>>,
}

/// Computes the ordered Pareto trace of one example, keeping only nodes with
/// likelihood strictly above `tau_min`.
pub fn example_trace(
    h: &Hierarchy,
    label: usize,
    p: &[f64],
    kinds: &[MetricKind],
    tau_min: f64,
) -> Result<ParetoTrace> {
    h.check_node(label)?;
    check_len(p, h.num_nodes())?;
    check_finite(p)?;
    let candidates: Vec<usize> = (0..h.num_nodes()).filter(|&y| p[y] > tau_min).collect();
    let xs: Vec<f64> = candidates.iter().map(|&y| p[y]).collect();
    let ys: Vec<f64> = candidates.iter().map(|&y| h.info(y)).collect();
    let nodes: Vec<usize> = ordered_pareto_set(&xs, &ys)?
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    let scores: Vec<f64> = nodes.iter().map(|&y| p[y]).collect();
    let mut values = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut row = Vec::with_capacity(nodes.len());
        for &node in &nodes {
            let pred = effective_prediction(h, label, node)?;
            row.push(evaluate(h, kind, label, pred)?);
        }
        values.push(row);
    }
    Ok(ParetoTrace {
        nodes,
        scores,
        values,
    })
}

/// Dataset-level metric as a piecewise-constant function of the threshold.
///
/// `evaluate(tau)` returns `base` for `tau >= steps[0].0` and `steps[j].1`
/// for `steps[j].0 > tau >= steps[j+1].0`. Breakpoints are strictly
/// descending and every step changes the value.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    n: usize,
    tau_min: f64,
    base: f64,
    steps: Vec<(f64, f64)>,
}

impl Curve {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    /// Mean metric on the highest threshold interval.
    pub fn base(&self) -> f64 {
        self.base
    }

    /// `(threshold, value)` pairs, thresholds strictly descending.
    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn evaluate(&self, tau: f64) -> f64 {
        let idx = self.steps.partition_point(|&(s, _)| s > tau);
        if idx == 0 {
            self.base
        } else {
            self.steps[idx - 1].1
        }
    }

    /// Value on the interval immediately below `tau`; unlike
    /// [`Curve::evaluate`] a breakpoint exactly at `tau` counts.
    pub fn value_below(&self, tau: f64) -> f64 {
        let idx = self.steps.partition_point(|&(s, _)| s >= tau);
        if idx == 0 {
            self.base
        } else {
            self.steps[idx - 1].1
        }
    }

    /// Rebuilds a curve from serialised parts; used by file round-trips.
    pub fn from_parts(n: usize, tau_min: f64, base: f64, steps: Vec<(f64, f64)>) -> Self {
        Self {
            n,
            tau_min,
            base,
            steps,
        }
    }
}

/// Builds the dataset curve for one metric by merging per-example traces.
///
/// The result agrees with direct recomputation of the mean metric at any
/// threshold in `(tau_min, 1]` up to summation-order rounding. All
/// per-example breakpoints are merged by one sort with the fixed tie order
/// (score descending, example index ascending, position ascending), so two
/// runs over the same inputs produce identical breakpoint lists.
pub fn construct_dataset_curve(
    h: &Hierarchy,
    labels: &[usize],
    probs: &Matrix,
    kind: MetricKind,
    tau_min: f64,
) -> Result<Curve> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if probs.rows() != labels.len() {
        return Err(Error::DimMismatch {
            expected: labels.len(),
            got: probs.rows(),
        });
    }
    if !(0.0..1.0).contains(&tau_min) {
        return Err(Error::InvalidHyperParameter(format!(
            "tau_min must lie in [0, 1), got {tau_min}"
        )));
    }
    for &y in labels {
        if y >= h.num_nodes() {
            return Err(Error::LabelOutOfRange {
                label: y,
                num_nodes: h.num_nodes(),
            });
        }
    }

    let n = labels.len();
    let mut base_sum = 0.0;
    // (score, example, delta) for every per-example breakpoint; scores are
    // strictly decreasing within an example, so (score, example) is unique
    // and the sort below realises the (s desc, example asc, k asc) tie order
    let mut merged: Vec<(f64, u32, f64)> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let trace = example_trace(h, label, probs.row(i), &[kind], tau_min)?;
        let z = &trace.values[0];
        base_sum += z[0];
        merged.extend((1..z.len()).map(|k| (trace.scores[k], i as u32, z[k] - z[k - 1])));
    }
    merged.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then_with(|| a.1.cmp(&b.1))
    });

    let scale = 1.0 / n as f64;
    let base = base_sum * scale;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut acc = base_sum;
    let mut last_value = base;
    let mut idx = 0;
    while idx < merged.len() {
        let score = merged[idx].0;
        while idx < merged.len() && merged[idx].0 == score {
            acc += merged[idx].2;
            idx += 1;
        }
        let value = acc * scale;
        if value != last_value {
            steps.push((score, value));
            last_value = value;
        }
    }

    Ok(Curve {
        n,
        tau_min,
        base,
        steps,
    })
}

/// One operating point of a pair of curves over a shared threshold interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub x: f64,
    pub y: f64,
    /// Upper edge of the threshold interval this point covers (1.0 for the
    /// first interval).
    pub tau_hi: f64,
    /// True when the whole interval lies below the majority threshold 0.5;
    /// plots draw these points dashed.
    pub below_majority: bool,
}

fn check_compatible(a: &Curve, b: &Curve) -> Result<()> {
    if a.n != b.n || a.tau_min != b.tau_min {
        return Err(Error::IncompatibleCurves(format!(
            "n={} tau_min={} vs n={} tau_min={}",
            a.n, a.tau_min, b.n, b.tau_min
        )));
    }
    Ok(())
}

/// Parametric pairing of two curves built from the same examples: one point
/// per interval of the union of their breakpoints, threshold descending.
pub fn pair_curve(a: &Curve, b: &Curve) -> Result<Vec<PairPoint>> {
    check_compatible(a, b)?;
    let mut points = Vec::with_capacity(a.steps.len() + b.steps.len() + 1);
    let (mut va, mut vb) = (a.base, b.base);
    points.push(PairPoint {
        x: va,
        y: vb,
        tau_hi: 1.0,
        below_majority: false,
    });
    let (mut i, mut j) = (0, 0);
    while i < a.steps.len() || j < b.steps.len() {
        let sa = a.steps.get(i).map(|s| s.0).unwrap_or(f64::NEG_INFINITY);
        let sb = b.steps.get(j).map(|s| s.0).unwrap_or(f64::NEG_INFINITY);
        let s = sa.max(sb);
        if sa == s {
            va = a.steps[i].1;
            i += 1;
        }
        if sb == s {
            vb = b.steps[j].1;
            j += 1;
        }
        points.push(PairPoint {
            x: va,
            y: vb,
            tau_hi: s,
            below_majority: s <= 0.5,
        });
    }
    Ok(points)
}

/// Step integral of a correctness curve with respect to a recall curve.
///
/// Operating points are ordered by ascending recall; on each recall step the
/// left (higher-threshold) correctness value applies, and the first point's
/// value extends down to recall zero. No interpolation between achieved
/// points.
pub fn step_integral(correctness: &Curve, recall: &Curve) -> Result<f64> {
    let mut points = pair_curve(correctness, recall)?;
    // ascending recall; equal recalls resolve to the higher-threshold point
    points.sort_by(|p, q| {
        p.y.partial_cmp(&q.y)
            .unwrap()
            .then(p.tau_hi.partial_cmp(&q.tau_hi).unwrap())
    });
    let mut levels: Vec<(f64, f64)> = Vec::new(); // (recall, correctness)
    for p in points {
        match levels.last_mut() {
            Some(last) if last.0 == p.y => last.1 = p.x,
            _ => levels.push((p.y, p.x)),
        }
    }
    let mut total = levels[0].1 * levels[0].0;
    for w in levels.windows(2) {
        total += w[0].1 * (w[1].0 - w[0].0);
    }
    Ok(total)
}

/// Maximum recall over operating points whose correctness is at least
/// `threshold`; zero when no point qualifies.
pub fn recall_at_correctness(correct: &Curve, recall: &Curve, threshold: f64) -> Result<f64> {
    let points = pair_curve(correct, recall)?;
    Ok(points
        .iter()
        .filter(|p| p.x >= threshold)
        .map(|p| p.y)
        .fold(0.0, f64::max))
}

/// Integral and intercept statistics of a method's operating curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSummary {
    /// Average precision: integral of precision with respect to recall.
    pub ap: f64,
    /// Average correct: integral of correct with respect to recall.
    pub ac: f64,
    /// Recall at 90% correct.
    pub r_at_90c: f64,
    /// Recall at 95% correct.
    pub r_at_95c: f64,
}

pub fn summary_metrics(
    correct: &Curve,
    precision: &Curve,
    recall: &Curve,
) -> Result<CurveSummary> {
    Ok(CurveSummary {
        ap: step_integral(precision, recall)?,
        ac: step_integral(correct, recall)?,
        r_at_90c: recall_at_correctness(correct, recall, 0.90)?,
        r_at_95c: recall_at_correctness(correct, recall, 0.95)?,
    })
}

/// How per-example precision and recall aggregate into a dataset F1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F1Mode {
    /// Harmonic mean of the dataset-mean precision and recall (default).
    HarmonicOfMeans,
    /// Mean over examples of each example's harmonic mean.
    MeanOfHarmonics,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p <= 0.0 || r <= 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// F1 of information precision and recall for a fixed inference rule.
pub fn f1_at_rule(
    h: &Hierarchy,
    labels: &[usize],
    probs: &Matrix,
    rule: &InferenceSpec,
    mode: F1Mode,
) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sum_p = 0.0;
    let mut sum_r = 0.0;
    let mut sum_h = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        let pred = infer(h, probs.row(i), rule)?;
        let pred = effective_prediction(h, y, pred)?;
        let p = evaluate(h, MetricKind::PrecisionInfo, y, pred)?;
        let r = evaluate(h, MetricKind::RecallInfo, y, pred)?;
        sum_p += p;
        sum_r += r;
        sum_h += harmonic(p, r);
    }
    let n = labels.len() as f64;
    Ok(match mode {
        F1Mode::HarmonicOfMeans => harmonic(sum_p / n, sum_r / n),
        F1Mode::MeanOfHarmonics => sum_h / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::t1;

    const THIRD: f64 = 1.0 / 3.0;

    fn uniform_flat() -> [f64; 5] {
        [1.0, 2.0 * THIRD, THIRD, THIRD, THIRD]
    }

    #[test]
    fn pareto_t1_hand_trace() {
        let h = t1();
        let p = uniform_flat();
        let info: Vec<f64> = (0..5).map(|y| h.info(y)).collect();
        assert_eq!(ordered_pareto_set(&p, &info).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn pareto_degenerate_inputs() {
        assert_eq!(ordered_pareto_set(&[0.7], &[1.0]).unwrap(), vec![0]);
        // total domination leaves only the last element
        assert_eq!(
            ordered_pareto_set(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            vec![2]
        );
        assert!(ordered_pareto_set(&[1.0], &[f64::NAN]).is_err());
        assert!(ordered_pareto_set(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn trace_hand_values() {
        let h = t1();
        let trace = example_trace(
            &h,
            3,
            &uniform_flat(),
            &[MetricKind::Correct, MetricKind::RecallInfo],
            0.0,
        )
        .unwrap();
        assert_eq!(trace.nodes, vec![0, 1, 2]);
        let s_expect = [1.0, 2.0 * THIRD, THIRD];
        for (s, e) in trace.scores.iter().zip(s_expect) {
            assert!((s - e).abs() < 1e-12);
        }
        assert_eq!(trace.values[0], vec![1.0, 1.0, 0.0]);
        let recall = 1.5f64.ln() / 3f64.ln();
        assert!((trace.values[1][0] - 0.0).abs() < 1e-12);
        assert!((trace.values[1][1] - recall).abs() < 1e-12);
        assert!((trace.values[1][2] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn trace_onehot_path_and_filter() {
        let h = t1();
        let onehot = [1.0, 1.0, 0.0, 1.0, 0.0];
        let trace = example_trace(&h, 3, &onehot, &[MetricKind::Correct], 0.0).unwrap();
        assert_eq!(trace.nodes, vec![3]);
        let trace = example_trace(&h, 3, &uniform_flat(), &[MetricKind::Correct], 0.99).unwrap();
        assert_eq!(trace.nodes, vec![0]);
    }

    #[test]
    fn single_example_curve() {
        let h = t1();
        let probs = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        let curve =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::Correct, 0.0).unwrap();
        assert_eq!(curve.base(), 1.0);
        assert_eq!(curve.steps().len(), 1);
        assert!((curve.steps()[0].0 - THIRD).abs() < 1e-12);
        assert_eq!(curve.steps()[0].1, 0.0);
        assert_eq!(curve.evaluate(0.5), 1.0);
        assert_eq!(curve.evaluate(THIRD), 1.0);
        assert_eq!(curve.evaluate(0.2), 0.0);
    }

    #[test]
    fn constant_curve_for_perfect_predictions() {
        let h = t1();
        let mut probs = Matrix::zeros(3, 5);
        for (i, &leaf) in h.leaves().iter().enumerate() {
            for u in h.path_from_root(leaf) {
                probs.set(i, u, 1.0);
            }
        }
        let labels: Vec<usize> = h.leaves().to_vec();
        let curve =
            construct_dataset_curve(&h, &labels, &probs, MetricKind::Correct, 0.0).unwrap();
        assert_eq!(curve.base(), 1.0);
        assert!(curve.steps().is_empty());
    }

    #[test]
    fn curve_input_validation() {
        let h = t1();
        let probs = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        assert!(matches!(
            construct_dataset_curve(&h, &[], &probs, MetricKind::Correct, 0.0),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            construct_dataset_curve(&h, &[9], &probs, MetricKind::Correct, 0.0),
            Err(Error::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn pair_points_and_split_flag() {
        let h = t1();
        let probs = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        let correct =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::Correct, 0.0).unwrap();
        let recall =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::RecallInfo, 0.0).unwrap();
        let points = pair_curve(&correct, &recall).unwrap();
        assert_eq!(points.len(), 3);
        assert_eq!(points[0].tau_hi, 1.0);
        assert!(!points[0].below_majority);
        assert!(!points[1].below_majority); // interval [1/3, 2/3) straddles 0.5
        assert!(points[2].below_majority);
        // two constant curves give a single point
        let ones = Matrix::new(1, 5, vec![1.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let c = construct_dataset_curve(&h, &[3], &ones, MetricKind::Correct, 0.0).unwrap();
        let r = construct_dataset_curve(&h, &[3], &ones, MetricKind::RecallInfo, 0.0).unwrap();
        assert_eq!(pair_curve(&c, &r).unwrap().len(), 1);
    }

    #[test]
    fn summary_hand_values() {
        let h = t1();
        let probs = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        let correct =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::Correct, 0.0).unwrap();
        let precision =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::PrecisionInfo, 0.0).unwrap();
        let recall =
            construct_dataset_curve(&h, &[3], &probs, MetricKind::RecallInfo, 0.0).unwrap();
        let summary = summary_metrics(&correct, &precision, &recall).unwrap();
        let r = 1.5f64.ln() / 3f64.ln();
        assert!((summary.ac - r).abs() < 1e-12);
        assert!((summary.ac - 0.3691).abs() < 1e-4);
        assert!((summary.r_at_90c - r).abs() < 1e-12);
        assert!((summary.r_at_95c - r).abs() < 1e-12);
        // perfect predictions reach the ideal summary
        let ones = Matrix::new(1, 5, vec![1.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let c = construct_dataset_curve(&h, &[3], &ones, MetricKind::Correct, 0.0).unwrap();
        let p = construct_dataset_curve(&h, &[3], &ones, MetricKind::PrecisionInfo, 0.0).unwrap();
        let r = construct_dataset_curve(&h, &[3], &ones, MetricKind::RecallInfo, 0.0).unwrap();
        let s = summary_metrics(&c, &p, &r).unwrap();
        assert_eq!(s.ap, 1.0);
        assert_eq!(s.ac, 1.0);
        assert_eq!(s.r_at_90c, 1.0);
    }

    #[test]
    fn incompatible_curves_are_rejected() {
        let h = t1();
        let one = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        let mut two_rows = uniform_flat().to_vec();
        two_rows.extend_from_slice(&uniform_flat());
        let two = Matrix::new(2, 5, two_rows).unwrap();
        let a = construct_dataset_curve(&h, &[3], &one, MetricKind::Correct, 0.0).unwrap();
        let b = construct_dataset_curve(&h, &[3, 2], &two, MetricKind::Correct, 0.0).unwrap();
        assert!(matches!(
            pair_curve(&a, &b),
            Err(Error::IncompatibleCurves(_))
        ));
    }

    #[test]
    fn f1_values() {
        let h = t1();
        let probs = Matrix::new(1, 5, uniform_flat().to_vec()).unwrap();
        // majority prediction is a: precision 1, recall ln(3/2)/ln3
        let f1 = f1_at_rule(
            &h,
            &[3],
            &probs,
            &InferenceSpec::Majority,
            F1Mode::HarmonicOfMeans,
        )
        .unwrap();
        let r = 1.5f64.ln() / 3f64.ln();
        assert!((f1 - 2.0 * r / (1.0 + r)).abs() < 1e-12);
        assert!((f1 - 0.5391).abs() < 1e-4);
        // all-root predictions have zero recall, so F1 is zero
        let root_only = Matrix::new(1, 5, vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let f1 = f1_at_rule(
            &h,
            &[3],
            &root_only,
            &InferenceSpec::Majority,
            F1Mode::HarmonicOfMeans,
        )
        .unwrap();
        assert_eq!(f1, 0.0);
        // single example: both aggregation modes coincide
        let a = f1_at_rule(&h, &[3], &probs, &InferenceSpec::Leaf, F1Mode::HarmonicOfMeans)
            .unwrap();
        let b = f1_at_rule(&h, &[3], &probs, &InferenceSpec::Leaf, F1Mode::MeanOfHarmonics)
            .unwrap();
        assert_eq!(a, b);
    }
}
