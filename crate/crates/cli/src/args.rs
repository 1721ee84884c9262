//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "hierop",
    about = "Hierarchical classification: likelihoods, losses, inference and operating curves",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Check a hierarchy file and print its basic statistics.
    Validate(ValidateArgs),
    /// Convert scores to likelihoods, build operating curves and summaries.
    Eval(EvalArgs),
    /// Predict one node per score row with a chosen inference rule.
    Infer(InferArgs),
    /// Generate a synthetic hierarchy with Gaussian features.
    Synth(SynthArgs),
    /// Train a linear model and evaluate it on held-out data.
    Train(TrainArgs),
    /// Render a curve report as an SVG chart.
    Plot(PlotArgs),
}

#[derive(clap::Args)]
pub struct ValidateArgs {
    /// Hierarchy CSV with header "name,parent"; node index = row order.
    #[arg(long)]
    pub hierarchy: PathBuf,
    /// Accept internal nodes with a single child.
    #[arg(long)]
    pub allow_unary: bool,
}

#[derive(clap::Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long)]
    pub allow_unary: bool,
    /// Ground-truth labels, one node name per line.
    #[arg(long)]
    pub labels: PathBuf,
    /// Score matrix, CSV or binary (HSC1).
    #[arg(long)]
    pub scores: PathBuf,
    /// Parametrisation name, or "raw" to ingest likelihoods directly.
    #[arg(long)]
    pub method: String,
    /// Comma-separated list of curve metrics.
    #[arg(long, default_value = "correct,exact,precision,recall")]
    pub metrics: String,
    /// Smallest threshold the curves cover.
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    /// F1 aggregation: harmonic_of_means or mean_of_harmonics.
    #[arg(long, default_value = "harmonic_of_means")]
    pub f1_mode: String,
    /// Directory for report.csv and summary.json.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(clap::Args)]
pub struct InferArgs {
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long)]
    pub allow_unary: bool,
    #[arg(long)]
    pub scores: PathBuf,
    /// Parametrisation name, or "raw" for precomputed likelihoods.
    #[arg(long)]
    pub method: String,
    /// Inference rule: confidence_threshold, majority, plurality, leaf,
    /// info_threshold, expected_info or crm.
    #[arg(long)]
    pub rule: String,
    /// Confidence threshold for rule=confidence_threshold.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Information threshold for rule=info_threshold, in nats.
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Reward shift for rule=expected_info.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Optional |Y| x |Y| cost table for rule=crm (defaults to the negated
    /// information reward).
    #[arg(long)]
    pub cost_table: Option<PathBuf>,
    /// CRM domain: all_nodes or leaves.
    #[arg(long, default_value = "all_nodes")]
    pub over: String,
    /// Predictions file, one node name per line.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(clap::Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub branching_min: usize,
    #[arg(long, default_value_t = 4)]
    pub branching_max: usize,
    #[arg(long, default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 125)]
    pub train_per_leaf: usize,
    #[arg(long, default_value_t = 25)]
    pub test_per_leaf: usize,
    /// Parent-to-child drift of class means.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_tree: f64,
    /// Within-class observation noise.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_obs: f64,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Write features in the binary score format instead of CSV.
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(clap::Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub hierarchy: PathBuf,
    #[arg(long)]
    pub allow_unary: bool,
    #[arg(long)]
    pub train_features: PathBuf,
    #[arg(long)]
    pub train_labels: PathBuf,
    #[arg(long)]
    pub test_features: PathBuf,
    #[arg(long)]
    pub test_labels: PathBuf,
    /// Parametrisation to train.
    #[arg(long)]
    pub method: String,
    /// Loss name: flat_nll, hxe, multilabel_focal, cond_softmax_nll,
    /// cond_sigmoid_bce, deeprtc, soft_max_descendant, soft_max_margin.
    #[arg(long)]
    pub loss: String,
    /// Loss weight/discount (hxe: 0.1, multilabel_focal: 0.9,
    /// soft_max_margin: 5 when omitted).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Focusing exponent for multilabel_focal (default 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cut probability for deeprtc (default 0.5).
    #[arg(long)]
    pub p_cut: Option<f64>,
    /// Monte-Carlo cuts per step for deeprtc.
    #[arg(long, default_value_t = 1)]
    pub num_samples: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 3e-4)]
    pub weight_decay: f64,
    /// Disable the cosine learning-rate schedule.
    #[arg(long)]
    pub no_cosine: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drop this fraction of leaves from the training hierarchy; test labels
    /// are projected onto the reduced tree (unseen-class protocol).
    #[arg(long, default_value_t = 0.0)]
    pub drop_leaf_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub drop_seed: u64,
    #[arg(long, default_value = "correct,exact,precision,recall")]
    pub metrics: String,
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    #[arg(long, default_value = "harmonic_of_means")]
    pub f1_mode: String,
    /// Directory for scores.csv, report.csv and summary.json.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(clap::Args)]
pub struct PlotArgs {
    /// Curve report CSV produced by eval or train.
    #[arg(long)]
    pub report: PathBuf,
    /// Optional second report to overlay.
    #[arg(long)]
    pub report2: Option<PathBuf>,
    /// Plot this metric against the threshold (step chart).
    #[arg(long)]
    pub metric: Option<String>,
    /// Metric on the x axis of a parametric plot.
    #[arg(long)]
    pub x: Option<String>,
    /// Metric on the y axis of a parametric plot.
    #[arg(long)]
    pub y: Option<String>,
    /// Output SVG file.
    #[arg(long)]
    pub output: PathBuf,
}
