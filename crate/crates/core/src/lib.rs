//! Hierarchical classification over a rooted class taxonomy.
//!
//! The crate covers the full pipeline for classifiers that may predict any
//! node of the hierarchy, not just leaves:
//!
//! - [`hierarchy`]: the rooted tree, its derived per-node quantities
//!   (depth, leaf counts, information content) and tree algorithms.
//! - [`likelihood`]: parametrisations mapping raw score vectors to per-node
//!   likelihoods (flat softmax, conditional softmax/sigmoid, multilabel
//!   sigmoid, parameter sharing, exclusive softmax).
//! - [`loss`]: training losses with closed-form gradients for each
//!   parametrisation.
//! - [`inference`]: rules mapping a likelihood vector to a single predicted
//!   node (confidence threshold, plurality, expected information, CRM, ...).
//! - [`metrics`]: example-level correctness and specificity measures.
//! - [`curve`]: the specificity-vs-correctness operating characteristic:
//!   per-example Pareto sets, dataset-level piecewise-constant curves and
//!   summary statistics (AP, AC, R@XC, F1).
//! - [`train`]: a deterministic desk-scale linear-model trainer and a
//!   synthetic hierarchical data generator.

pub mod curve;
pub mod error;
pub mod hierarchy;
pub mod inference;
pub mod likelihood;
pub mod loss;
pub mod metrics;
pub mod train;
pub mod util;

pub use curve::{
    construct_dataset_curve, example_trace, f1_at_rule, ordered_pareto_set, pair_curve,
    recall_at_correctness, step_integral, summary_metrics, Curve, CurveSummary, F1Mode, PairPoint,
    ParetoTrace,
};
pub use error::{Error, Result};
pub use hierarchy::{project_to_subtree, truncate_at_depth, Hierarchy, SubtreeProjection};
pub use inference::{infer, CostDomain, CostKind, InferenceSpec};
pub use likelihood::{
    exclusive_likelihood, likelihood, likelihood_batch, validate_distribution, Method, Validity,
};
pub use loss::{loss_value, loss_value_and_grad, LossSpec};
pub use metrics::{effective_prediction, evaluate, MetricKind};
pub use train::{
    generate_synthetic, leaf_accuracy, level_accuracy, predict_scores, train_level_truncated,
    train_linear, Dataset, LevelModel, LinearModel, SyntheticSpec, TrainConfig, TrainResult,
};
pub use util::Matrix;
