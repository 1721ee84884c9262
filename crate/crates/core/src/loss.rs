//! Training losses with closed-form gradients.
//!
//! Every loss accepts a general label `y` anywhere in the hierarchy. Each
//! spec binds to the parametrisation whose score layout it trains; see
//! [`LossSpec::method`].

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::likelihood::Method;
use crate::util::{check_finite, check_len, log_sigmoid, log_sum_exp_map, sigmoid};

/// A loss function together with its hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LossSpec {
    FlatNll,
    Hxe { alpha: f64 },
    MultilabelFocal { alpha: f64, gamma: f64 },
    CondSoftmaxNll,
    CondSigmoidBce,
    DeepRtc { p_cut: f64, num_samples: usize, seed: u64 },
    SoftMaxDescendant,
    SoftMaxMargin { alpha: f64 },
}

impl LossSpec {
    /// The parametrisation whose score layout this loss trains.
    pub fn method(&self) -> Method {
        match self {
            LossSpec::FlatNll | LossSpec::Hxe { .. } => Method::FlatSoftmax,
            LossSpec::MultilabelFocal { .. } => Method::MultilabelSigmoid,
            LossSpec::CondSoftmaxNll => Method::CondSoftmax,
            LossSpec::CondSigmoidBce => Method::CondSigmoid,
            LossSpec::DeepRtc { .. } => Method::DeepRtc,
            LossSpec::SoftMaxDescendant | LossSpec::SoftMaxMargin { .. } => {
                Method::ExclusiveSoftmax
            }
        }
    }

    pub fn param_dim(&self, h: &Hierarchy) -> usize {
        self.method().param_dim(h)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperParameter(msg));
        match *self {
            LossSpec::Hxe { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => {
                bad(format!("hxe alpha must be >= 0, got {alpha}"))
            }
            LossSpec::MultilabelFocal { alpha, gamma }
                if !(alpha > 0.0 && alpha < 1.0) || !(gamma >= 0.0 && gamma.is_finite()) =>
            {
                bad(format!(
                    "focal requires alpha in (0, 1) and gamma >= 0, got alpha={alpha} gamma={gamma}"
                ))
            }
            LossSpec::DeepRtc {
                p_cut, num_samples, ..
            } if !(0.0..=1.0).contains(&p_cut) || num_samples == 0 => bad(format!(
                "deeprtc requires p_cut in [0, 1] and num_samples >= 1, \
                 got p_cut={p_cut} num_samples={num_samples}"
            )),
            LossSpec::SoftMaxMargin { alpha } if !(alpha >= 0.0 && alpha.is_finite()) => {
                bad(format!("soft_max_margin alpha must be >= 0, got {alpha}"))
            }
            _ => Ok(()),
        }
    }

    /// Derives a per-step spec for stochastic training; only the Deep RTC
    /// cut seed changes, everything else is returned as-is.
    pub fn reseed(&self, step: u64) -> LossSpec {
        match *self {
            LossSpec::DeepRtc {
                p_cut,
                num_samples,
                seed,
            } => LossSpec::DeepRtc {
                p_cut,
                num_samples,
                seed: seed
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add(step.wrapping_mul(0xD1B5_4A32_D192_ED03))
                    .wrapping_add(1),
            },
            ref other => other.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossSpec::FlatNll => "flat_nll",
            LossSpec::Hxe { .. } => "hxe",
            LossSpec::MultilabelFocal { .. } => "multilabel_focal",
            LossSpec::CondSoftmaxNll => "cond_softmax_nll",
            LossSpec::CondSigmoidBce => "cond_sigmoid_bce",
            LossSpec::DeepRtc { .. } => "deeprtc",
            LossSpec::SoftMaxDescendant => "soft_max_descendant",
            LossSpec::SoftMaxMargin { .. } => "soft_max_margin",
        }
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Log-sum-exp of `theta` restricted to an index set, and the gradient
/// scatter of the corresponding softmax scaled by `weight`.
fn lse_and_scatter(theta: &[f64], idx: &[usize], weight: f64, grad: &mut [f64]) -> f64 {
    let lse = log_sum_exp_map(idx, |i| theta[i]);
    for &i in idx {
        grad[i] += weight * (theta[i] - lse).exp();
    }
    lse
}

fn prepare(h: &Hierarchy, dim: usize, y: usize, theta: &[f64]) -> Result<()> {
    h.check_node(y)?;
    check_len(theta, dim)?;
    check_finite(theta)
}

// --- flat softmax NLL -------------------------------------------------------

fn flat_nll_vg(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    prepare(h, h.num_leaves(), y, theta)?;
    let mut grad = vec![0.0; theta.len()];
    let all: Vec<usize> = (0..theta.len()).collect();
    let label: Vec<usize> = h
        .leaves_under(y)?
        .iter()
        .map(|&u| h.leaf_position(u).unwrap())
        .collect();
    let lse_all = lse_and_scatter(theta, &all, 1.0, &mut grad);
    let lse_label = lse_and_scatter(theta, &label, -1.0, &mut grad);
    Ok((lse_all - lse_label, grad))
}

/// Negative log likelihood of the flat softmax: cross-entropy for leaf
/// labels, the log of the leaf-sum for internal labels.
pub fn flat_nll(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<f64> {
    flat_nll_vg(h, y, theta).map(|(l, _)| l)
}

// --- hierarchical cross-entropy ---------------------------------------------

fn hxe_vg(h: &Hierarchy, y: usize, theta: &[f64], alpha: f64) -> Result<(f64, Vec<f64>)> {
    LossSpec::Hxe { alpha }.validate()?;
    prepare(h, h.num_leaves(), y, theta)?;
    let gamma = (-alpha).exp();
    let path = h.path_from_root(y);
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    let mut weight = 1.0; // gamma^(k-1)
    for k in 1..path.len() {
        let outer: Vec<usize> = h
            .leaves_under(path[k - 1])?
            .iter()
            .map(|&u| h.leaf_position(u).unwrap())
            .collect();
        let inner: Vec<usize> = h
            .leaves_under(path[k])?
            .iter()
            .map(|&u| h.leaf_position(u).unwrap())
            .collect();
        let lse_outer = lse_and_scatter(theta, &outer, weight, &mut grad);
        let lse_inner = lse_and_scatter(theta, &inner, -weight, &mut grad);
        loss += weight * (lse_outer - lse_inner);
        weight *= gamma;
    }
    Ok((loss, grad))
}

/// Hierarchical cross-entropy: conditional NLL terms along the ancestor
/// chain with geometric discount `gamma = exp(-alpha)`.
pub fn hxe(h: &Hierarchy, y: usize, theta: &[f64], alpha: f64) -> Result<f64> {
    hxe_vg(h, y, theta, alpha).map(|(l, _)| l)
}

// --- multilabel focal -------------------------------------------------------

fn multilabel_focal_vg(
    h: &Hierarchy,
    y: usize,
    theta: &[f64],
    alpha: f64,
    gamma: f64,
) -> Result<(f64, Vec<f64>)> {
    LossSpec::MultilabelFocal { alpha, gamma }.validate()?;
    prepare(h, h.num_nodes() - 1, y, theta)?;
    let mut on_path = vec![false; h.num_nodes()];
    for u in h.path_from_root(y) {
        on_path[u] = true;
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for u in 0..h.num_nodes() {
        let Some(k) = h.nonroot_position(u) else {
            continue;
        };
        let x = theta[k];
        let p = sigmoid(x);
        let q = sigmoid(-x); // 1 - p
        if on_path[u] {
            loss += -alpha * q.powf(gamma) * log_sigmoid(x);
            grad[k] = alpha * gamma * p * q.powf(gamma) * log_sigmoid(x) - alpha * q.powf(gamma + 1.0);
        } else {
            loss += -(1.0 - alpha) * p.powf(gamma) * log_sigmoid(-x);
            grad[k] = (1.0 - alpha) * p.powf(gamma + 1.0)
                - (1.0 - alpha) * gamma * p.powf(gamma) * q * log_sigmoid(-x);
        }
    }
    Ok((loss, grad))
}

/// Focal loss summed over independent per-node binary problems; a node is a
/// positive target iff it is a non-root ancestor of the label.
pub fn multilabel_focal(h: &Hierarchy, y: usize, theta: &[f64], alpha: f64, gamma: f64) -> Result<f64> {
    multilabel_focal_vg(h, y, theta, alpha, gamma).map(|(l, _)| l)
}

// --- conditional softmax NLL ------------------------------------------------

fn cond_softmax_nll_vg(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    prepare(h, h.num_nodes() - 1, y, theta)?;
    let pos = |u: usize| h.nonroot_position(u).unwrap();
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for u in h.path_from_root(y) {
        if u == h.root() {
            continue;
        }
        let sib: Vec<usize> = h.siblings(u)?.iter().map(|&v| pos(v)).collect();
        let lse = lse_and_scatter(theta, &sib, 1.0, &mut grad);
        loss += lse - theta[pos(u)];
        grad[pos(u)] -= 1.0;
    }
    Ok((loss, grad))
}

/// Sum of sibling-group cross-entropies along the label's ancestor chain;
/// convex for general labels.
pub fn cond_softmax_nll(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<f64> {
    cond_softmax_nll_vg(h, y, theta).map(|(l, _)| l)
}

// --- conditional sigmoid BCE ------------------------------------------------

fn cond_sigmoid_bce_vg(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    prepare(h, h.num_nodes() - 1, y, theta)?;
    let mut on_path = vec![false; h.num_nodes()];
    let path = h.path_from_root(y);
    for &u in &path {
        on_path[u] = true;
    }
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    // Ancestors are inclusive of y, so children of y itself contribute
    // negative terms.
    for &u in &path {
        for &v in h.children(u) {
            let k = h.nonroot_position(v).unwrap();
            let x = theta[k];
            if on_path[v] {
                loss += -log_sigmoid(x);
                grad[k] += sigmoid(x) - 1.0;
            } else {
                loss += -log_sigmoid(-x);
                grad[k] += sigmoid(x);
            }
        }
    }
    Ok((loss, grad))
}

/// Binary cross-entropy over the children of every ancestor of the label.
pub fn cond_sigmoid_bce(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<f64> {
    cond_sigmoid_bce_vg(h, y, theta).map(|(l, _)| l)
}

// --- Deep RTC stochastic tree sampling --------------------------------------

fn deeprtc_vg(
    h: &Hierarchy,
    y: usize,
    theta: &[f64],
    p_cut: f64,
    num_samples: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    LossSpec::DeepRtc {
        p_cut,
        num_samples,
        seed,
    }
    .validate()?;
    prepare(h, h.num_nodes(), y, theta)?;
    let beta = h.sum_over_ancestors(theta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loss = 0.0;
    let mut grad_beta = vec![0.0; h.num_nodes()];
    for _ in 0..num_samples {
        let cut = h.random_cut_with(p_cut, &mut rng)?;
        // The label's event within the cut: the unique ancestor of y in the
        // cut when the cut crosses at or above y, otherwise the cut nodes
        // inside y's subtree. Either way the cross-entropy targets the total
        // mass of the event, which recovers the plain projected-label
        // cross-entropy whenever the projection is defined.
        let mut target: Vec<usize> = cut
            .iter()
            .copied()
            .filter(|&k| h.is_ancestor(k, y))
            .collect();
        if target.is_empty() {
            target = cut
                .iter()
                .copied()
                .filter(|&k| h.is_ancestor(y, k))
                .collect();
        }
        debug_assert!(!target.is_empty());
        let lse_cut = lse_and_scatter(&beta, &cut, 1.0, &mut grad_beta);
        let lse_target = lse_and_scatter(&beta, &target, -1.0, &mut grad_beta);
        loss += lse_cut - lse_target;
    }
    let scale = 1.0 / num_samples as f64;
    for g in grad_beta.iter_mut() {
        *g *= scale;
    }
    let grad = h.sum_over_descendants(&grad_beta)?;
    Ok((loss * scale, grad))
}

/// Monte-Carlo estimate (deterministic per seed) of the expected
/// cross-entropy of path scores at the leaves of a random cut, with the
/// label projected onto the cut.
pub fn deeprtc_loss(
    h: &Hierarchy,
    y: usize,
    theta: &[f64],
    p_cut: f64,
    num_samples: usize,
    seed: u64,
) -> Result<f64> {
    deeprtc_vg(h, y, theta, p_cut, num_samples, seed).map(|(l, _)| l)
}

// --- soft-max-descendant ------------------------------------------------------

fn soft_max_descendant_vg(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
    prepare(h, h.num_nodes(), y, theta)?;
    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for u in h.path_from_root(y) {
        // index set {u} plus all labels neither ancestor nor descendant of u
        let mut related = vec![false; h.num_nodes()];
        for a in h.path_from_root(u) {
            related[a] = true;
        }
        for d in h.descendants(u)? {
            related[d] = true;
        }
        let mut idx: Vec<usize> = (0..h.num_nodes()).filter(|&v| !related[v]).collect();
        idx.push(u);
        let weight = 1.0 / h.leaf_count(u) as f64;
        let lse = lse_and_scatter(theta, &idx, weight, &mut grad);
        loss += weight * (lse - theta[u]);
        grad[u] -= weight;
    }
    Ok((loss, grad))
}

/// Cross-entropy of each ancestor of the label against all incorrect
/// subtrees, weighted by the inverse of its leaf count.
pub fn soft_max_descendant(h: &Hierarchy, y: usize, theta: &[f64]) -> Result<f64> {
    soft_max_descendant_vg(h, y, theta).map(|(l, _)| l)
}

// --- soft-max-margin ----------------------------------------------------------

fn soft_max_margin_vg(
    h: &Hierarchy,
    y: usize,
    theta: &[f64],
    alpha: f64,
) -> Result<(f64, Vec<f64>)> {
    LossSpec::SoftMaxMargin { alpha }.validate()?;
    prepare(h, h.num_nodes(), y, theta)?;
    let mut adjusted = theta.to_vec();
    for v in 0..h.num_nodes() {
        if !h.is_ancestor(v, y) {
            adjusted[v] += alpha;
        }
    }
    let mut grad = vec![0.0; theta.len()];
    let all: Vec<usize> = (0..h.num_nodes()).collect();
    let lse = lse_and_scatter(&adjusted, &all, 1.0, &mut grad);
    grad[y] -= 1.0;
    Ok((lse - adjusted[y], grad))
}

/// Cross-entropy over all nodes with a margin added to the logits of labels
/// that are not correct for `y`. The margin is a training-time adjustment
/// only; inference uses unadjusted scores.
pub fn soft_max_margin(h: &Hierarchy, y: usize, theta: &[f64], alpha: f64) -> Result<f64> {
    soft_max_margin_vg(h, y, theta, alpha).map(|(l, _)| l)
}

// --- dispatch -----------------------------------------------------------------

/// Loss value and its gradient with respect to the raw scores.
///
/// The gradient matches central finite differences of the same function; for
/// Deep RTC both are taken at the fixed seed carried by the spec.
pub fn loss_value_and_grad(
    h: &Hierarchy,
    spec: &LossSpec,
    y: usize,
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    spec.validate()?;
    match *spec {
        LossSpec::FlatNll => flat_nll_vg(h, y, theta),
        LossSpec::Hxe { alpha } => hxe_vg(h, y, theta, alpha),
        LossSpec::MultilabelFocal { alpha, gamma } => {
            multilabel_focal_vg(h, y, theta, alpha, gamma)
        }
        LossSpec::CondSoftmaxNll => cond_softmax_nll_vg(h, y, theta),
        LossSpec::CondSigmoidBce => cond_sigmoid_bce_vg(h, y, theta),
        LossSpec::DeepRtc {
            p_cut,
            num_samples,
            seed,
        } => deeprtc_vg(h, y, theta, p_cut, num_samples, seed),
        LossSpec::SoftMaxDescendant => soft_max_descendant_vg(h, y, theta),
        LossSpec::SoftMaxMargin { alpha } => soft_max_margin_vg(h, y, theta, alpha),
    }
}

/// Loss value only.
pub fn loss_value(h: &Hierarchy, spec: &LossSpec, y: usize, theta: &[f64]) -> Result<f64> {
    loss_value_and_grad(h, spec, y, theta).map(|(l, _)| l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::t1;
    use crate::likelihood::cond_softmax_likelihood;

    const LN2: f64 = std::f64::consts::LN_2;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!((got - want).abs() <= tol, "got {got}, want {want}");
    }

    #[test]
    fn flat_nll_values() {
        let h = t1();
        assert_close(flat_nll(&h, 3, &[0.0; 3]).unwrap(), 3f64.ln(), 1e-12);
        assert_close(
            flat_nll(&h, 1, &[0.0; 3]).unwrap(),
            -(2f64 / 3.0).ln(),
            1e-12,
        );
        assert_eq!(flat_nll(&h, 0, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn flat_nll_gradient_is_softmax_minus_onehot_for_leaves() {
        let h = t1();
        let theta = [0.4, -0.9, 1.2];
        let (_, grad) = flat_nll_vg(&h, 3, &theta).unwrap();
        let p = crate::likelihood::flat_softmax_likelihood(&h, &theta).unwrap();
        // leaf a1 sits at leaf position 1
        let expect = [p[2], p[3] - 1.0, p[4]];
        for (g, e) in grad.iter().zip(expect) {
            assert_close(*g, e, 1e-12);
        }
    }

    #[test]
    fn hxe_values() {
        let h = t1();
        // alpha = 0 telescopes to the flat NLL for leaf labels
        assert_close(hxe(&h, 3, &[0.0; 3], 0.0).unwrap(), 3f64.ln(), 1e-12);
        let theta = [1.3, -0.2, 0.5];
        assert_close(
            hxe(&h, 3, &theta, 0.0).unwrap(),
            flat_nll(&h, 3, &theta).unwrap(),
            1e-9,
        );
        // gamma = 1/2: two conditional terms by hand
        let alpha = 2f64.ln();
        let expect = -(2f64 / 3.0).ln() - 0.5 * 0.5f64.ln();
        assert_close(hxe(&h, 3, &[0.0; 3], alpha).unwrap(), expect, 1e-12);
        assert_close(expect, 0.7520, 1e-4);
        assert_eq!(hxe(&h, 0, &[0.0; 3], 1.0).unwrap(), 0.0);
    }

    #[test]
    fn multilabel_focal_values() {
        let h = t1();
        // Positives (a, a1) and negatives (b, a2) all sit at p = 1/2.
        let loss = multilabel_focal(&h, 3, &[0.0; 4], 0.9, 1.0).unwrap();
        assert_close(loss, LN2, 1e-12);
        assert_close(loss, 0.6931, 1e-4);
        // gamma = 0 reduces to alpha-weighted BCE
        let theta = [0.7, -0.3, 0.2, -1.0];
        let loss = multilabel_focal(&h, 3, &theta, 0.5, 0.0).unwrap();
        let bce: f64 = [(0, true), (1, false), (2, true), (3, false)]
            .iter()
            .map(|&(k, pos)| {
                if pos {
                    -log_sigmoid(theta[k])
                } else {
                    -log_sigmoid(-theta[k])
                }
            })
            .sum();
        assert_close(loss, 0.5 * bce, 1e-12);
        // saturation drives the loss to zero
        let loss = multilabel_focal(&h, 3, &[40.0, -40.0, 40.0, -40.0], 0.9, 2.0).unwrap();
        assert!(loss < 1e-12);
    }

    #[test]
    fn cond_softmax_nll_values() {
        let h = t1();
        assert_close(cond_softmax_nll(&h, 3, &[0.0; 4]).unwrap(), 2.0 * LN2, 1e-12);
        assert_eq!(cond_softmax_nll(&h, 0, &[0.0; 4]).unwrap(), 0.0);
        // matches the negative log of the parametrised likelihood
        let theta = [0.3, -1.1, 0.8, 0.1];
        let p = cond_softmax_likelihood(&h, &theta).unwrap();
        for y in 0..5 {
            assert_close(
                cond_softmax_nll(&h, y, &theta).unwrap(),
                -p[y].ln(),
                1e-9,
            );
        }
    }

    #[test]
    fn cond_sigmoid_bce_values() {
        let h = t1();
        assert_close(cond_sigmoid_bce(&h, 3, &[0.0; 4]).unwrap(), 4.0 * LN2, 1e-12);
        assert_close(cond_sigmoid_bce(&h, 1, &[0.0; 4]).unwrap(), 4.0 * LN2, 1e-12);
        // saturated scores along and off the path
        let loss = cond_sigmoid_bce(&h, 3, &[30.0, -30.0, 30.0, -30.0]).unwrap();
        assert!(loss < 1e-3);
    }

    #[test]
    fn deeprtc_deterministic_cases() {
        let h = t1();
        let theta = [0.2, 0.5, -0.4, 1.0, -0.6];
        // p_cut = 0 is the parameter-sharing softmax cross-entropy
        let beta = h.sum_over_ancestors(&theta).unwrap();
        let leaf_scores: Vec<f64> = h.leaves().iter().map(|&y| beta[y]).collect();
        for (seed, y) in [(0u64, 3usize), (42, 2), (7, 1)] {
            let loss = deeprtc_loss(&h, y, &theta, 0.0, 3, seed).unwrap();
            let expect = flat_nll(&h, y, &leaf_scores).unwrap();
            assert_close(loss, expect, 1e-12);
        }
        // p_cut = 1 projects onto the root's children
        let loss = deeprtc_loss(&h, 3, &theta, 1.0, 2, 5).unwrap();
        let idx_a = 0; // children(root) = [a, b], label projects to a
        let kids: Vec<f64> = vec![beta[1], beta[2]];
        let lse = crate::util::log_sum_exp(&kids);
        assert_close(loss, lse - kids[idx_a], 1e-12);
    }

    #[test]
    fn deeprtc_expectation_over_cuts() {
        let h = t1();
        // The two cuts of T1 at p_cut = 0.5 give CE ln 2 and ln 3.
        let expect = 0.5 * (2f64.ln() + 3f64.ln());
        let loss = deeprtc_loss(&h, 3, &[0.0; 5], 0.5, 40_000, 11).unwrap();
        // 3-sigma Monte Carlo band: per-sample std is |ln2 - ln3| / 2
        let sigma = 0.5 * (3f64.ln() - 2f64.ln()) / (40_000f64).sqrt();
        assert!(
            (loss - expect).abs() < 3.0 * sigma + 1e-9,
            "loss={loss} expect={expect}"
        );
        assert_close(expect, 0.8959, 1e-4);
    }

    #[test]
    fn deeprtc_same_seed_same_value() {
        let h = t1();
        let theta = [0.3, -0.2, 0.9, 0.0, -1.4];
        let a = deeprtc_loss(&h, 3, &theta, 0.5, 4, 123).unwrap();
        let b = deeprtc_loss(&h, 3, &theta, 0.5, 4, 123).unwrap();
        assert_eq!(a, b);
        let c = deeprtc_loss(&h, 3, &theta, 0.5, 4, 124).unwrap();
        assert!(a != c || (a - c).abs() < 1e-30);
    }

    #[test]
    fn soft_max_descendant_values() {
        let h = t1();
        // truth b: the root term is a singleton cross-entropy (zero), the b
        // term competes against {a, a1, a2}
        assert_close(
            soft_max_descendant(&h, 2, &[0.0; 5]).unwrap(),
            4f64.ln(),
            1e-12,
        );
        // truth a1: (1/2) ln 2 + ln 3
        let expect = 0.5 * 2f64.ln() + 3f64.ln();
        assert_close(soft_max_descendant(&h, 3, &[0.0; 5]).unwrap(), expect, 1e-12);
        assert_close(expect, 1.4452, 1e-4);
        assert_eq!(soft_max_descendant(&h, 0, &[0.0; 5]).unwrap(), 0.0);
    }

    #[test]
    fn soft_max_margin_values() {
        let h = t1();
        // alpha = 0 is the plain cross-entropy over all nodes
        let theta = [0.1, 0.4, -0.5, 0.9, -1.2];
        let all: Vec<usize> = (0..5).collect();
        let lse = log_sum_exp_map(&all, |i| theta[i]);
        assert_close(
            soft_max_margin(&h, 3, &theta, 0.0).unwrap(),
            lse - theta[3],
            1e-12,
        );
        // margin 5 on the incorrect set {b, a2}
        let expect = (3.0 + 2.0 * 5f64.exp()).ln();
        assert_close(soft_max_margin(&h, 3, &[0.0; 5], 5.0).unwrap(), expect, 1e-12);
        assert_close(expect, 5.7030, 1e-3);
    }

    #[test]
    fn soft_max_margin_alpha0_gradient() {
        let h = t1();
        let theta = [0.0; 5];
        let (_, grad) = soft_max_margin_vg(&h, 3, &theta, 0.0).unwrap();
        for (v, g) in grad.iter().enumerate() {
            let expect = 0.2 - if v == 3 { 1.0 } else { 0.0 };
            assert_close(*g, expect, 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = t1();
        assert!(matches!(
            flat_nll(&h, 3, &[0.0; 2]),
            Err(Error::DimMismatch { .. })
        ));
        assert!(matches!(
            loss_value(&h, &LossSpec::FlatNll, 3, &[f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(LossSpec::MultilabelFocal {
            alpha: 1.5,
            gamma: 1.0
        }
        .validate()
        .is_err());
        assert!(LossSpec::DeepRtc {
            p_cut: 1.3,
            num_samples: 1,
            seed: 0
        }
        .validate()
        .is_err());
    }
}
