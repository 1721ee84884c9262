//! Shared generators and brute-force oracles for the integration suites.
//!
//! Everything here recomputes results by definition (quadratic scans,
//! materialised matrices, finite differences) so the library's fast paths
//! are checked against an independent route.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hierop::hierarchy::Hierarchy;
use hierop::metrics::{effective_prediction, evaluate, MetricKind};
use hierop::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The canonical five-node tree: root -> {a, b}, a -> {a1, a2}.
pub fn t1() -> Hierarchy {
    Hierarchy::from_edges(
        &[
            ("root", None),
            ("a", Some("root")),
            ("b", Some("root")),
            ("a1", Some("a")),
            ("a2", Some("a")),
        ],
        false,
    )
    .unwrap()
}

/// Random tree with up to `max_nodes` nodes and no unary chains. Nodes are
/// attached to uniformly random earlier nodes; internal nodes left with a
/// single child get an extra leaf appended.
pub fn random_tree(rng: &mut ChaCha8Rng, max_nodes: usize) -> Hierarchy {
    let n = rng.random_range(1..=max_nodes.max(1));
    let mut parents: Vec<Option<usize>> = vec![None];
    for i in 1..n {
        parents.push(Some(rng.random_range(0..i)));
    }
    // repair unary internal nodes by adding one more leaf child
    let mut child_count = vec![0usize; parents.len()];
    for p in parents.iter().flatten() {
        child_count[*p] += 1;
    }
    for y in 0..child_count.len() {
        if child_count[y] == 1 {
            parents.push(Some(y));
        }
    }
    let edges: Vec<(String, Option<String>)> = parents
        .iter()
        .enumerate()
        .map(|(i, p)| (format!("n{i}"), p.map(|p| format!("n{p}"))))
        .collect();
    Hierarchy::from_edges(&edges, false).unwrap()
}

pub fn random_theta(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-scale..scale))
        .collect()
}

/// Random likelihood satisfying the parent-sum validity with equality and
/// `p(root) = 1`: normalised random exclusive mass totalled bottom-up.
pub fn random_valid_p(h: &Hierarchy, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut excl: Vec<f64> = (0..h.num_nodes())
        .map(|_| rng.random_range(0.01..1.0))
        .collect();
    let total: f64 = excl.iter().sum();
    for e in excl.iter_mut() {
        *e /= total;
    }
    h.sum_over_descendants(&excl).unwrap()
}

/// As [`random_valid_p`] but with the exclusive mass supported on leaves.
pub fn random_leaf_supported_p(h: &Hierarchy, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut excl = vec![0.0; h.num_nodes()];
    let mut total = 0.0;
    for &leaf in h.leaves() {
        let m = rng.random_range(0.01..1.0);
        excl[leaf] = m;
        total += m;
    }
    for e in excl.iter_mut() {
        *e /= total;
    }
    h.sum_over_descendants(&excl).unwrap()
}

pub fn random_nonroot_label(h: &Hierarchy, rng: &mut ChaCha8Rng) -> usize {
    if h.num_nodes() == 1 {
        return h.root();
    }
    loop {
        let y = rng.random_range(0..h.num_nodes());
        if y != h.root() {
            return y;
        }
    }
}

// --- brute-force oracles -----------------------------------------------------

/// Ancestor matrix by O(|Y|^2) closure: `anc[v][u]` iff `u` is an inclusive
/// ancestor of `v`.
pub fn ancestor_matrix(h: &Hierarchy) -> Vec<Vec<bool>> {
    let n = h.num_nodes();
    let mut anc = vec![vec![false; n]; n];
    for &v in h.topological_order() {
        anc[v][v] = true;
        if let Some(p) = h.parent(v) {
            let parent_row = anc[p].clone();
            for u in 0..n {
                anc[v][u] = anc[v][u] || parent_row[u];
            }
        }
    }
    anc
}

/// Deepest node that is an ancestor of both, by scanning the matrix.
pub fn brute_lca(h: &Hierarchy, anc: &[Vec<bool>], u: usize, v: usize) -> usize {
    (0..h.num_nodes())
        .filter(|&w| anc[u][w] && anc[v][w])
        .max_by_key(|&w| h.depth(w))
        .unwrap()
}

/// Pareto survivors by a quadratic scan, mirroring the stable-sort tie rule:
/// `i` survives unless some `j` beats it in one coordinate without losing
/// the other, or is an identical pair appearing earlier.
pub fn brute_force_pareto(x: &[f64], y: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut keep = Vec::new();
    for i in 0..n {
        let dominated = (0..n).any(|j| {
            j != i
                && ((x[j] > x[i] && y[j] >= y[i])
                    || (x[j] >= x[i] && y[j] > y[i])
                    || (x[j] == x[i] && y[j] == y[i] && j < i))
        });
        if !dominated {
            keep.push(i);
        }
    }
    keep
}

/// Mean metric at one threshold by direct per-example inference. The
/// threshold rule is reimplemented inline so the curve machinery is not in
/// the loop.
pub fn brute_curve_value(
    h: &Hierarchy,
    labels: &[usize],
    probs: &Matrix,
    kind: MetricKind,
    tau: f64,
) -> f64 {
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let p = probs.row(i);
        let mut best: Option<usize> = None;
        for yhat in 0..h.num_nodes() {
            if p[yhat] <= tau {
                continue;
            }
            best = Some(match best {
                None => yhat,
                Some(b) => {
                    if h.info(yhat) > h.info(b) || (h.info(yhat) == h.info(b) && p[yhat] > p[b]) {
                        yhat
                    } else {
                        b
                    }
                }
            });
        }
        let pred = best.unwrap_or(h.root());
        let pred = effective_prediction(h, label, pred).unwrap();
        total += evaluate(h, kind, label, pred).unwrap();
    }
    total / labels.len() as f64
}

/// Central finite differences of `f` at `theta`.
pub fn finite_difference_grad(
    f: impl Fn(&[f64]) -> f64,
    theta: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(theta.len());
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        probe[i] = theta[i] + step;
        let hi = f(&probe);
        probe[i] = theta[i] - step;
        let lo = f(&probe);
        probe[i] = theta[i];
        grad.push((hi - lo) / (2.0 * step));
    }
    grad
}

/// Every leaf has exactly one inclusive ancestor in `cut`.
pub fn is_antichain_covering_leaves(h: &Hierarchy, cut: &[usize]) -> bool {
    h.leaves().iter().all(|&leaf| {
        let hits = h
            .path_from_root(leaf)
            .into_iter()
            .filter(|u| cut.contains(u))
            .count();
        hits == 1
    })
}

pub fn probs_matrix(rows: Vec<Vec<f64>>) -> Matrix {
    let r = rows.len();
    let c = rows[0].len();
    Matrix::new(r, c, rows.into_iter().flatten().collect()).unwrap()
}
