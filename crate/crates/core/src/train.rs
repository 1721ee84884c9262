//! Desk-scale linear-model training and synthetic hierarchical data.
//!
//! The generator builds a random tree whose node means drift from their
//! parents, so feature similarity mirrors the hierarchy. The trainer is
//! single-threaded minibatch SGD with momentum and an optional cosine
//! schedule; identical seeds give identical models.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hierarchy::{truncate_at_depth, Hierarchy, SubtreeProjection};
use crate::inference::infer_leaf;
use crate::likelihood::{likelihood, Method};
use crate::loss::{loss_value_and_grad, LossSpec};
use crate::util::Matrix;

/// Linear map from feature vectors to raw parameter vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `param_dim x feature_dim`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(param_dim: usize, feature_dim: usize) -> Self {
        Self {
            weights: Matrix::zeros(param_dim, feature_dim),
            bias: vec![0.0; param_dim],
        }
    }

    pub fn param_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.cols()
    }

    /// Raw scores for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut theta = self.bias.clone();
        for (j, t) in theta.iter_mut().enumerate() {
            let row = self.weights.row(j);
            *t += row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        theta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub cosine_schedule: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 3e-4,
            cosine_schedule: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperParameter(msg));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        if !(self.learning_rate >= 0.0) || !(self.momentum >= 0.0) || !(self.weight_decay >= 0.0)
        {
            return bad("learning_rate, momentum and weight_decay must be >= 0".into());
        }
        Ok(())
    }
}

/// Feature matrix plus one label node per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// All leaves sit at this depth.
    pub depth: usize,
    pub branching_min: usize,
    pub branching_max: usize,
    pub feature_dim: usize,
    pub train_per_leaf: usize,
    pub test_per_leaf: usize,
    /// Parent-to-child drift of class means.
    pub sigma_tree: f64,
    /// Within-class observation noise.
    pub sigma_obs: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        // 16 leaves, 21 nodes, 2000 train / 400 test examples.
        Self {
            depth: 2,
            branching_min: 4,
            branching_max: 4,
            feature_dim: 32,
            train_per_leaf: 125,
            test_per_leaf: 25,
            sigma_tree: 1.0,
            sigma_obs: 1.0,
            seed: 17,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if self.depth == 0 {
            return bad("depth must be >= 1");
        }
        if self.branching_min < 2 || self.branching_max < self.branching_min {
            return bad("branching range must satisfy 2 <= min <= max");
        }
        if self.feature_dim == 0 || self.train_per_leaf == 0 {
            return bad("feature_dim and train_per_leaf must be positive");
        }
        if !(self.sigma_tree >= 0.0) || !(self.sigma_obs >= 0.0) {
            return bad("sigma_tree and sigma_obs must be >= 0");
        }
        Ok(())
    }
}

/// Builds a random complete tree and Gaussian leaf-labeled samples around
/// drifting class means; byte-for-byte deterministic given the seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Hierarchy, Dataset, Dataset)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut edges: Vec<(String, Option<String>)> = vec![("root".into(), None)];
    let mut frontier: Vec<String> = vec!["root".into()];
    for level in 0..spec.depth {
        let mut next = Vec::new();
        for parent in &frontier {
            let fanout = rng.random_range(spec.branching_min..=spec.branching_max);
            for k in 0..fanout {
                let name = if level == 0 {
                    format!("n{k}")
                } else {
                    format!("{parent}_{k}")
                };
                edges.push((name.clone(), Some(parent.clone())));
                next.push(name);
            }
        }
        frontier = next;
    }
    let h = Hierarchy::from_edges(&edges, false)?;

    let d = spec.feature_dim;
    let mut means = vec![vec![0.0f64; d]; h.num_nodes()];
    for &y in h.topological_order() {
        if let Some(p) = h.parent(y) {
            for j in 0..d {
                let step: f64 = rng.sample(StandardNormal);
                means[y][j] = means[p][j] + spec.sigma_tree * step;
            }
        }
    }

    let sample_split = |per_leaf: usize, rng: &mut ChaCha8Rng| -> Dataset {
        let n = per_leaf * h.num_leaves();
        let mut features = Matrix::zeros(n, d);
        let mut labels = Vec::with_capacity(n);
        let mut row = 0;
        for &leaf in h.leaves() {
            for _ in 0..per_leaf {
                let out = features.row_mut(row);
                for (j, o) in out.iter_mut().enumerate() {
                    let noise: f64 = rng.sample(StandardNormal);
                    *o = means[leaf][j] + spec.sigma_obs * noise;
                }
                labels.push(leaf);
                row += 1;
            }
        }
        Dataset { features, labels }
    };

    let train = sample_split(spec.train_per_leaf, &mut rng);
    let test = sample_split(spec.test_per_leaf, &mut rng);
    Ok((h, train, test))
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: LinearModel,
    /// Mean training loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Minibatch SGD with momentum, weight decay and an optional cosine
/// learning-rate schedule over all steps.
pub fn train_linear(
    h: &Hierarchy,
    data: &Dataset,
    method: Method,
    loss: &LossSpec,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    loss.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if data.features.rows() != data.labels.len() {
        return Err(Error::DimMismatch {
            expected: data.labels.len(),
            got: data.features.rows(),
        });
    }
    let param_dim = method.param_dim(h);
    if loss.param_dim(h) != param_dim {
        return Err(Error::InvalidHyperParameter(format!(
            "loss {} trains {} parameters but method {} expects {}",
            loss,
            loss.param_dim(h),
            method,
            param_dim
        )));
    }
    for &y in &data.labels {
        h.check_node(y)?;
    }

    let d = data.features.cols();
    let n = data.len();
    let mut model = LinearModel::zeros(param_dim, d);
    let mut vel_w = Matrix::zeros(param_dim, d);
    let mut vel_b = vec![0.0; param_dim];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let batches_per_epoch = n.div_ceil(cfg.batch_size);
    let total_steps = (cfg.epochs * batches_per_epoch) as f64;

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0u64;
    let mut example_counter = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for (batch_index, batch) in order.chunks(cfg.batch_size).enumerate() {
            let lr = if cfg.cosine_schedule {
                cfg.learning_rate * 0.5
                    * (1.0 + (std::f64::consts::PI * step as f64 / total_steps).cos())
            } else {
                cfg.learning_rate
            };
            let mut grad_w = Matrix::zeros(param_dim, d);
            let mut grad_b = vec![0.0; param_dim];
            let inv_b = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = data.features.row(i);
                let theta = model.forward(x);
                let spec_i = loss.reseed(example_counter);
                example_counter += 1;
                let (value, g_theta) = loss_value_and_grad(h, &spec_i, data.labels[i], &theta)?;
                if !value.is_finite() {
                    return Err(Error::NanLoss { batch_index });
                }
                epoch_loss += value;
                for j in 0..param_dim {
                    let gj = g_theta[j] * inv_b;
                    grad_b[j] += gj;
                    let row = grad_w.row_mut(j);
                    for (r, v) in row.iter_mut().zip(x) {
                        *r += gj * v;
                    }
                }
            }
            for j in 0..param_dim {
                let w = model.weights.row_mut(j);
                let g = grad_w.row_mut(j);
                let v = vel_w.row_mut(j);
                for k in 0..d {
                    let total = g[k] + cfg.weight_decay * w[k];
                    v[k] = cfg.momentum * v[k] + total;
                    w[k] -= lr * v[k];
                }
                let total = grad_b[j] + cfg.weight_decay * model.bias[j];
                vel_b[j] = cfg.momentum * vel_b[j] + total;
                model.bias[j] -= lr * vel_b[j];
            }
            step += 1;
        }
        epoch_losses.push(epoch_loss / n as f64);
    }
    Ok(TrainResult {
        model,
        epoch_losses,
    })
}

/// Raw score batch of a model over a feature matrix.
pub fn predict_scores(model: &LinearModel, features: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(features.rows(), model.param_dim());
    for i in 0..features.rows() {
        let theta = model.forward(features.row(i));
        out.row_mut(i).copy_from_slice(&theta);
    }
    out
}

/// Fraction of examples whose most likely leaf is the true leaf.
pub fn leaf_accuracy(
    h: &Hierarchy,
    method: Method,
    model: &LinearModel,
    data: &Dataset,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut hits = 0usize;
    for i in 0..data.len() {
        let theta = model.forward(data.features.row(i));
        let p = likelihood(h, method, &theta)?;
        if infer_leaf(h, &p)? == data.labels[i] {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// A flat softmax classifier trained over the hierarchy truncated at a depth.
#[derive(Debug, Clone)]
pub struct LevelModel {
    pub level: usize,
    pub hierarchy: Hierarchy,
    pub model: LinearModel,
    pub epoch_losses: Vec<f64>,
}

/// Truncates the hierarchy at `level`, projects the labels up and trains a
/// flat softmax at that level.
pub fn train_level_truncated(
    h: &Hierarchy,
    data: &Dataset,
    level: usize,
    cfg: &TrainConfig,
) -> Result<LevelModel> {
    let sub = truncate_at_depth(h, level)?;
    let proj = SubtreeProjection::new(h, &sub)?;
    let projected = Dataset {
        features: data.features.clone(),
        labels: data.labels.iter().map(|&y| proj.project(y)).collect(),
    };
    let result = train_linear(&sub, &projected, Method::FlatSoftmax, &LossSpec::FlatNll, cfg)?;
    Ok(LevelModel {
        level,
        hierarchy: sub,
        model: result.model,
        epoch_losses: result.epoch_losses,
    })
}

/// Accuracy of a level-truncated model evaluated at `eval_level`:
/// predictions and truths are both projected onto the hierarchy truncated at
/// `eval_level` and compared exactly.
pub fn level_accuracy(
    h: &Hierarchy,
    trained: &LevelModel,
    data: &Dataset,
    eval_level: usize,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let eval_h = truncate_at_depth(h, eval_level)?;
    let pred_proj = SubtreeProjection::new(&trained.hierarchy, &eval_h)?;
    let truth_proj = SubtreeProjection::new(h, &eval_h)?;
    let leaves = trained.hierarchy.leaves();
    let mut hits = 0usize;
    for i in 0..data.len() {
        let theta = trained.model.forward(data.features.row(i));
        let mut best = 0usize;
        for k in 1..theta.len() {
            if theta[k] > theta[best] {
                best = k;
            }
        }
        let pred = pred_proj.project(leaves[best]);
        let truth = truth_proj.project(data.labels[i]);
        if pred == truth {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}
