//! Likelihood parametrisations: maps from raw score vectors to per-node
//! likelihoods `p(y|x)` over the hierarchy.
//!
//! Parameter vector layouts are fixed by the hierarchy: leaf-indexed vectors
//! use ascending leaf index, non-root vectors use ascending node index with
//! the root omitted, and full vectors use node index order. All softmax
//! computations are max-shifted, so outputs stay finite for any finite input.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::util::{check_finite, check_len, log_sigmoid, log_sum_exp, sigmoid, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FlatSoftmax,
    CondSoftmax,
    CondSigmoid,
    MultilabelSigmoid,
    DeepRtc,
    PsSoftmax,
    ExclusiveSoftmax,
}

/// Structural guarantee that a parametrisation's output carries.
///
/// `LeafSumsToOne` implies the likelihood is a distribution over leaves with
/// internal nodes holding exactly the mass of their leaf descendants;
/// `ParentGeChildrenSum` allows internal nodes to hold exclusive mass of
/// their own; `ParentGeEachChild` only orders each edge; `None` guarantees
/// nothing beyond the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    LeafSumsToOne,
    ParentGeChildrenSum,
    ParentGeEachChild,
    None,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::FlatSoftmax,
        Method::CondSoftmax,
        Method::CondSigmoid,
        Method::MultilabelSigmoid,
        Method::DeepRtc,
        Method::PsSoftmax,
        Method::ExclusiveSoftmax,
    ];

    /// Dimension of the raw parameter vector for a given hierarchy.
    pub fn param_dim(&self, h: &Hierarchy) -> usize {
        match self {
            Method::FlatSoftmax => h.num_leaves(),
            Method::CondSoftmax | Method::CondSigmoid | Method::MultilabelSigmoid => {
                h.num_nodes() - 1
            }
            Method::DeepRtc | Method::PsSoftmax | Method::ExclusiveSoftmax => h.num_nodes(),
        }
    }

    pub fn validity(&self) -> Validity {
        match self {
            Method::FlatSoftmax | Method::CondSoftmax | Method::PsSoftmax => {
                Validity::LeafSumsToOne
            }
            Method::ExclusiveSoftmax => Validity::ParentGeChildrenSum,
            Method::CondSigmoid => Validity::ParentGeEachChild,
            Method::MultilabelSigmoid | Method::DeepRtc => Validity::None,
        }
    }

    /// Whether the parametrisation pins the root likelihood to one.
    pub fn root_is_one(&self) -> bool {
        !matches!(self, Method::DeepRtc)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::FlatSoftmax => "flat_softmax",
            Method::CondSoftmax => "cond_softmax",
            Method::CondSigmoid => "cond_sigmoid",
            Method::MultilabelSigmoid => "multilabel_sigmoid",
            Method::DeepRtc => "deeprtc",
            Method::PsSoftmax => "ps_softmax",
            Method::ExclusiveSoftmax => "exclusive_softmax",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "method",
                name: s.to_owned(),
                options: "flat_softmax, cond_softmax, cond_sigmoid, multilabel_sigmoid, \
                          deeprtc, ps_softmax, exclusive_softmax",
            })
    }
}

fn check_theta(h: &Hierarchy, method: Method, theta: &[f64]) -> Result<()> {
    check_len(theta, method.param_dim(h))?;
    check_finite(theta)
}

/// Softmax over the leaves, with internal nodes as bottom-up sums.
pub fn flat_softmax_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::FlatSoftmax, theta)?;
    let lse = log_sum_exp(theta);
    let mut mass = vec![0.0; h.num_nodes()];
    for (k, &leaf) in h.leaves().iter().enumerate() {
        mass[leaf] = (theta[k] - lse).exp();
    }
    h.sum_over_descendants(&mass)
}

/// Per-sibling-group softmax conditionals combined by a top-down product.
pub fn cond_softmax_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::CondSoftmax, theta)?;
    let n = h.num_nodes();
    let pos = |y: usize| h.nonroot_position(y).unwrap();
    // log conditional of each non-root node given its parent
    let mut log_r = vec![0.0; n];
    for u in 0..n {
        let kids = h.children(u);
        if kids.is_empty() {
            continue;
        }
        let lse = log_sum_exp(&kids.iter().map(|&c| theta[pos(c)]).collect::<Vec<_>>());
        for &c in kids {
            log_r[c] = theta[pos(c)] - lse;
        }
    }
    let mut log_q = vec![0.0; n];
    for &y in h.topological_order() {
        if let Some(p) = h.parent(y) {
            log_q[y] = log_q[p] + log_r[y];
        }
    }
    Ok(log_q.into_iter().map(f64::exp).collect())
}

/// Independent sigmoid conditionals combined by a top-down product.
pub fn cond_sigmoid_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::CondSigmoid, theta)?;
    let mut log_q = vec![0.0; h.num_nodes()];
    for &y in h.topological_order() {
        if let Some(p) = h.parent(y) {
            log_q[y] = log_q[p] + log_sigmoid(theta[h.nonroot_position(y).unwrap()]);
        }
    }
    Ok(log_q.into_iter().map(f64::exp).collect())
}

/// Independent binary logistic regression per non-root node.
pub fn multilabel_sigmoid_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::MultilabelSigmoid, theta)?;
    let mut p = vec![1.0; h.num_nodes()];
    for y in 0..h.num_nodes() {
        if let Some(k) = h.nonroot_position(y) {
            p[y] = sigmoid(theta[k]);
        }
    }
    Ok(p)
}

/// Sigmoid of cumulative path scores (parameter sharing scores mapped
/// monotonically into the unit interval).
pub fn deeprtc_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::DeepRtc, theta)?;
    let beta = h.sum_over_ancestors(theta)?;
    Ok(beta.into_iter().map(sigmoid).collect())
}

/// Flat softmax over cumulative path scores at the leaves.
pub fn ps_softmax_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::PsSoftmax, theta)?;
    let beta = h.sum_over_ancestors(theta)?;
    let beta_leaves: Vec<f64> = h.leaves().iter().map(|&y| beta[y]).collect();
    flat_softmax_likelihood(h, &beta_leaves)
}

/// Softmax over all nodes as exclusive mass, totalled bottom-up.
pub fn exclusive_softmax_likelihood(h: &Hierarchy, theta: &[f64]) -> Result<Vec<f64>> {
    check_theta(h, Method::ExclusiveSoftmax, theta)?;
    let lse = log_sum_exp(theta);
    let excl: Vec<f64> = theta.iter().map(|&t| (t - lse).exp()).collect();
    h.sum_over_descendants(&excl)
}

/// Applies the named parametrisation to one raw score vector.
pub fn likelihood(h: &Hierarchy, method: Method, theta: &[f64]) -> Result<Vec<f64>> {
    match method {
        Method::FlatSoftmax => flat_softmax_likelihood(h, theta),
        Method::CondSoftmax => cond_softmax_likelihood(h, theta),
        Method::CondSigmoid => cond_sigmoid_likelihood(h, theta),
        Method::MultilabelSigmoid => multilabel_sigmoid_likelihood(h, theta),
        Method::DeepRtc => deeprtc_likelihood(h, theta),
        Method::PsSoftmax => ps_softmax_likelihood(h, theta),
        Method::ExclusiveSoftmax => exclusive_softmax_likelihood(h, theta),
    }
}

/// Maps every row of a score batch through [`likelihood`].
pub fn likelihood_batch(h: &Hierarchy, method: Method, scores: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::zeros(scores.rows(), h.num_nodes());
    for i in 0..scores.rows() {
        let p = likelihood(h, method, scores.row(i))?;
        out.row_mut(i).copy_from_slice(&p);
    }
    Ok(out)
}

/// Checks that `p` is a valid probability function on the hierarchy:
/// every node's mass is at least the sum of its children's, within `tol`.
pub fn validate_distribution(h: &Hierarchy, p: &[f64], tol: f64) -> Result<()> {
    check_len(p, h.num_nodes())?;
    check_finite(p)?;
    for y in 0..h.num_nodes() {
        let kids: f64 = h.children(y).iter().map(|&c| p[c]).sum();
        if kids - p[y] > tol {
            return Err(Error::InvalidDistribution {
                node: y,
                violation: kids - p[y],
            });
        }
    }
    Ok(())
}

/// Checks that every entry lies in `[0, 1]` within `tol`.
pub fn validate_unit_range(p: &[f64], tol: f64) -> Result<()> {
    check_finite(p)?;
    for (i, &v) in p.iter().enumerate() {
        if v < -tol || v > 1.0 + tol {
            return Err(Error::OutOfUnitRange { index: i, value: v });
        }
    }
    Ok(())
}

/// Mass of each node excluding its children: `p~(u) = p(u) - sum children`.
///
/// `p` must satisfy the parent-sum validity within 1e-9; tiny negative
/// residuals from rounding are clamped to zero.
pub fn exclusive_likelihood(h: &Hierarchy, p: &[f64]) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-9;
    validate_distribution(h, p, TOL)?;
    let mut excl = vec![0.0; h.num_nodes()];
    for y in 0..h.num_nodes() {
        let kids: f64 = h.children(y).iter().map(|&c| p[c]).sum();
        excl[y] = (p[y] - kids).max(0.0);
    }
    Ok(excl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::t1;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "index {i}: got {g}, want {w}");
        }
    }

    #[test]
    fn flat_softmax_values() {
        let h = t1();
        let third = 1.0 / 3.0;
        let p = flat_softmax_likelihood(&h, &[0.0, 0.0, 0.0]).unwrap();
        assert_close(&p, &[1.0, 2.0 * third, third, third, third], 1e-12);
        // leaf layout is (b, a1, a2)
        let p = flat_softmax_likelihood(&h, &[2f64.ln(), 0.0, 0.0]).unwrap();
        assert_close(&p, &[1.0, 0.5, 0.5, 0.25, 0.25], 1e-12);
    }

    #[test]
    fn flat_softmax_shift_invariance() {
        let h = t1();
        let theta = [0.3, -1.2, 2.0];
        let shifted: Vec<f64> = theta.iter().map(|t| t + 17.5).collect();
        let p = flat_softmax_likelihood(&h, &theta).unwrap();
        let q = flat_softmax_likelihood(&h, &shifted).unwrap();
        assert_close(&p, &q, 1e-12);
    }

    #[test]
    fn cond_softmax_values() {
        let h = t1();
        let p = cond_softmax_likelihood(&h, &[0.0; 4]).unwrap();
        assert_close(&p, &[1.0, 0.5, 0.5, 0.25, 0.25], 1e-12);
        // non-root layout is (a, b, a1, a2)
        let p = cond_softmax_likelihood(&h, &[3f64.ln(), 0.0, 0.0, 0.0]).unwrap();
        assert!((p[1] - 0.75).abs() < 1e-12);
        assert!((p[3] - 0.375).abs() < 1e-12);
    }

    #[test]
    fn cond_softmax_per_group_shift_invariance() {
        let h = t1();
        let theta = [0.4, -0.3, 1.1, 0.2];
        // shift the (a, b) group by 5 and the (a1, a2) group by -2
        let shifted = [5.4, 4.7, -0.9, -1.8];
        let p = cond_softmax_likelihood(&h, &theta).unwrap();
        let q = cond_softmax_likelihood(&h, &shifted).unwrap();
        assert_close(&p, &q, 1e-12);
    }

    #[test]
    fn cond_sigmoid_values() {
        let h = t1();
        let p = cond_sigmoid_likelihood(&h, &[0.0; 4]).unwrap();
        assert_close(&p, &[1.0, 0.5, 0.5, 0.25, 0.25], 1e-12);
        let p = cond_sigmoid_likelihood(&h, &[0.0, 0.0, 2.0, 0.0]).unwrap();
        assert!((p[3] - 0.5 * sigmoid(2.0)).abs() < 1e-12);
        assert!((p[3] - 0.4404).abs() < 1e-4);
        // saturated path drives the likelihood to one
        let p = cond_sigmoid_likelihood(&h, &[600.0, 0.0, 600.0, 0.0]).unwrap();
        assert!((p[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multilabel_sigmoid_values() {
        let h = t1();
        let p = multilabel_sigmoid_likelihood(&h, &[0.0; 4]).unwrap();
        assert_close(&p, &[1.0, 0.5, 0.5, 0.5, 0.5], 1e-12);
        let p = multilabel_sigmoid_likelihood(&h, &[3f64.ln(), 0.0, 0.0, 0.0]).unwrap();
        assert!((p[1] - 0.75).abs() < 1e-12);
        // children may exceed parents; validity class is None
        let p = multilabel_sigmoid_likelihood(&h, &[-5.0, 0.0, 5.0, 0.0]).unwrap();
        assert!(p[3] > p[1]);
    }

    #[test]
    fn deeprtc_values() {
        let h = t1();
        let p = deeprtc_likelihood(&h, &[0.0; 5]).unwrap();
        assert_close(&p, &[0.5; 5], 1e-12);
        let p = deeprtc_likelihood(&h, &[0.0, 1.0, -1.0, 1.0, -1.0]).unwrap();
        assert!((p[3] - sigmoid(2.0)).abs() < 1e-12);
        assert!((p[3] - 0.8808).abs() < 1e-4);
        // a root shift raises every node's score
        let base = deeprtc_likelihood(&h, &[0.0; 5]).unwrap();
        let raised = deeprtc_likelihood(&h, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for y in 0..5 {
            assert!(raised[y] > base[y]);
        }
    }

    #[test]
    fn ps_softmax_values() {
        let h = t1();
        let third = 1.0 / 3.0;
        let p = ps_softmax_likelihood(&h, &[0.0; 5]).unwrap();
        assert_close(&p, &[1.0, 2.0 * third, third, third, third], 1e-12);
        // leaf path scores for theta_a = ln 2 are (0, ln 2, ln 2), so the
        // leaf distribution is (1, 2, 2) / 5
        let p = ps_softmax_likelihood(&h, &[0.0, 2f64.ln(), 0.0, 0.0, 0.0]).unwrap();
        assert_close(&p, &[1.0, 0.8, 0.2, 0.4, 0.4], 1e-12);
    }

    #[test]
    fn ps_softmax_reduces_to_flat_on_leaf_only_scores() {
        let h = t1();
        let leaf_scores = [0.7, -0.4, 1.3];
        let mut theta = vec![0.0; 5];
        for (k, &leaf) in h.leaves().iter().enumerate() {
            theta[leaf] = leaf_scores[k];
        }
        let p = ps_softmax_likelihood(&h, &theta).unwrap();
        let q = flat_softmax_likelihood(&h, &leaf_scores).unwrap();
        assert_close(&p, &q, 1e-12);
    }

    #[test]
    fn exclusive_softmax_values() {
        let h = t1();
        let p = exclusive_softmax_likelihood(&h, &[0.0; 5]).unwrap();
        assert_close(&p, &[1.0, 0.6, 0.2, 0.2, 0.2], 1e-12);
        let p = exclusive_softmax_likelihood(&h, &[0.0, 2f64.ln(), 0.0, 0.0, 0.0]).unwrap();
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-12);
        // pushing the root and internal mass away recovers the flat softmax
        let p = exclusive_softmax_likelihood(&h, &[-600.0, -600.0, 0.1, -0.2, 0.4]).unwrap();
        let q = flat_softmax_likelihood(&h, &[0.1, -0.2, 0.4]).unwrap();
        assert_close(&p, &q, 1e-9);
    }

    #[test]
    fn exclusive_likelihood_inverts_totals() {
        let h = t1();
        let third = 1.0 / 3.0;
        let p = [1.0, 2.0 * third, third, third, third];
        let excl = exclusive_likelihood(&h, &p).unwrap();
        assert_close(&excl, &[0.0, 0.0, third, third, third], 1e-12);
        // leaves keep their mass
        for &leaf in h.leaves() {
            assert_eq!(excl[leaf], p[leaf]);
        }
        // round trip with the exclusive softmax
        let theta = [0.2, -0.7, 0.4, 1.1, -0.3];
        let q = exclusive_softmax_likelihood(&h, &theta).unwrap();
        let back = exclusive_likelihood(&h, &q).unwrap();
        let lse = log_sum_exp(&theta);
        let direct: Vec<f64> = theta.iter().map(|&t| (t - lse).exp()).collect();
        assert_close(&back, &direct, 1e-9);
    }

    #[test]
    fn exclusive_likelihood_rejects_invalid_input() {
        let h = t1();
        // node a holds less than its children's sum
        let p = [1.0, 0.3, 0.5, 0.3, 0.3];
        assert!(matches!(
            exclusive_likelihood(&h, &p),
            Err(Error::InvalidDistribution { node: 1, .. })
        ));
    }

    #[test]
    fn dim_mismatch_is_reported() {
        let h = t1();
        for method in Method::ALL {
            let err = likelihood(&h, method, &[0.0]).unwrap_err();
            assert!(matches!(err, Error::DimMismatch { .. }), "{method}");
        }
    }

    #[test]
    fn finite_at_extreme_scores() {
        let h = t1();
        for method in Method::ALL {
            let dim = method.param_dim(&h);
            let mut theta = vec![700.0; dim];
            theta[0] = -700.0;
            let p = likelihood(&h, method, &theta).unwrap();
            assert!(p.iter().all(|v| v.is_finite()), "{method}");
        }
    }
}
