//! Subcommand implementations.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use hierop::curve::{construct_dataset_curve, f1_at_rule, summary_metrics, Curve, F1Mode};
use hierop::hierarchy::{Hierarchy, SubtreeProjection};
use hierop::inference::{infer, CostDomain, CostKind, InferenceSpec};
use hierop::likelihood::{likelihood_batch, validate_unit_range, Method};
use hierop::loss::LossSpec;
use hierop::metrics::MetricKind;
use hierop::train::{
    generate_synthetic, predict_scores, train_linear, Dataset, SyntheticSpec, TrainConfig,
};
use hierop::util::Matrix;

use rand::seq::SliceRandom;
use rand::SeedableRng;

use crate::args;
use crate::error::{CliError, Result};
use crate::formats;
use crate::plot;

pub fn cmd_validate(args: &args::ValidateArgs) -> Result<()> {
    let h = formats::read_hierarchy(&args.hierarchy, args.allow_unary)?;
    let info_max = (0..h.num_nodes())
        .map(|y| h.info(y))
        .fold(0.0f64, f64::max);
    println!(
        "|Y|={} |L|={} depth={} info=[0, {}]",
        h.num_nodes(),
        h.num_leaves(),
        h.max_depth(),
        info_max
    );
    Ok(())
}

/// Scores become likelihoods through the named parametrisation; `raw`
/// ingests a precomputed likelihood matrix with `|Y|` columns.
fn scores_to_likelihoods(h: &Hierarchy, method: &str, scores: &Matrix) -> Result<Matrix> {
    if method == "raw" {
        if scores.cols() != h.num_nodes() {
            return Err(CliError::data(format!(
                "raw likelihoods need {} columns, got {}",
                h.num_nodes(),
                scores.cols()
            )));
        }
        for i in 0..scores.rows() {
            validate_unit_range(scores.row(i), 1e-9).map_err(|e| {
                CliError::data(format!("row {i}: {e}"))
            })?;
        }
        return Ok(scores.clone());
    }
    let method: Method = method.parse()?;
    if scores.cols() != method.param_dim(h) {
        return Err(CliError::data(format!(
            "method {} needs {} columns, got {}",
            method,
            method.param_dim(h),
            scores.cols()
        )));
    }
    Ok(likelihood_batch(h, method, scores)?)
}

fn parse_metrics(list: &str) -> Result<Vec<MetricKind>> {
    let mut kinds = Vec::new();
    for name in list.split(',') {
        let kind: MetricKind = name.trim().parse()?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if kinds.is_empty() {
        return Err(CliError::usage("no metrics requested"));
    }
    Ok(kinds)
}

fn parse_f1_mode(name: &str) -> Result<F1Mode> {
    match name {
        "harmonic_of_means" => Ok(F1Mode::HarmonicOfMeans),
        "mean_of_harmonics" => Ok(F1Mode::MeanOfHarmonics),
        _ => Err(CliError::usage(format!(
            "unknown f1 mode {name:?}; valid options: harmonic_of_means, mean_of_harmonics"
        ))),
    }
}

/// Builds the requested curves plus the fixed summary block and writes
/// `report.csv` and `summary.json` into the output directory.
fn write_evaluation(
    h: &Hierarchy,
    labels: &[usize],
    probs: &Matrix,
    kinds: &[MetricKind],
    tau_min: f64,
    f1_mode: F1Mode,
    method_name: &str,
    out_dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let mut curves: Vec<Curve> = Vec::new();
    for &kind in kinds {
        curves.push(construct_dataset_curve(h, labels, probs, kind, tau_min)?);
    }
    // the summary always needs the correct / precision / recall trio
    let mut curve_for = |kind: MetricKind| -> Result<Curve> {
        match kinds.iter().position(|&k| k == kind) {
            Some(i) => Ok(curves[i].clone()),
            None => Ok(construct_dataset_curve(h, labels, probs, kind, tau_min)?),
        }
    };
    let correct = curve_for(MetricKind::Correct)?;
    let precision = curve_for(MetricKind::PrecisionInfo)?;
    let recall = curve_for(MetricKind::RecallInfo)?;
    let summary = summary_metrics(&correct, &precision, &recall)?;
    let f1_majority = f1_at_rule(h, labels, probs, &InferenceSpec::Majority, f1_mode)?;
    let f1_leaf = f1_at_rule(h, labels, probs, &InferenceSpec::Leaf, f1_mode)?;

    let names: Vec<String> = kinds.iter().map(|k| k.name().to_owned()).collect();
    let report_path = out_dir.join("report.csv");
    formats::write_report_csv(&report_path, &names, &curves)?;
    formats::write_summary_json(
        &out_dir.join("summary.json"),
        &formats::ReportSummary {
            ap: summary.ap,
            ac: summary.ac,
            r_at_90c: summary.r_at_90c,
            r_at_95c: summary.r_at_95c,
            f1_majority,
            f1_leaf,
            n_examples: labels.len(),
            method: method_name.to_owned(),
            metric_names: names,
        },
    )?;
    Ok(report_path)
}

pub fn cmd_eval(args: &args::EvalArgs) -> Result<()> {
    let h = formats::read_hierarchy(&args.hierarchy, args.allow_unary)?;
    let labels = formats::read_labels(&args.labels, &h)?;
    let scores = formats::read_scores(&args.scores)?;
    if scores.rows() != labels.len() {
        return Err(CliError::data(format!(
            "{} labels but {} score rows",
            labels.len(),
            scores.rows()
        )));
    }
    let probs = scores_to_likelihoods(&h, &args.method, &scores)?;
    let kinds = parse_metrics(&args.metrics)?;
    let f1_mode = parse_f1_mode(&args.f1_mode)?;
    let report = write_evaluation(
        &h,
        &labels,
        &probs,
        &kinds,
        args.tau_min,
        f1_mode,
        &args.method,
        &args.output,
    )?;
    println!(
        "wrote {} and {}",
        report.display(),
        args.output.join("summary.json").display()
    );
    Ok(())
}

fn build_rule(args: &args::InferArgs) -> Result<InferenceSpec> {
    let spec = match args.rule.as_str() {
        "confidence_threshold" => InferenceSpec::ConfidenceThreshold { tau: args.tau },
        "majority" => InferenceSpec::Majority,
        "plurality" => InferenceSpec::Plurality,
        "leaf" => InferenceSpec::Leaf,
        "info_threshold" => InferenceSpec::InfoThreshold { zeta: args.zeta },
        "expected_info" => InferenceSpec::ExpectedInfo { lambda: args.lambda },
        "crm" => {
            let cost = match &args.cost_table {
                Some(path) => {
                    let table = formats::read_scores(path)?;
                    CostKind::Table(table)
                }
                None => CostKind::NegInfoReward,
            };
            let over: CostDomain = args.over.parse()?;
            InferenceSpec::Crm { cost, over }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown rule {other:?}; valid options: confidence_threshold, majority, \
                 plurality, leaf, info_threshold, expected_info, crm"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

pub fn cmd_infer(args: &args::InferArgs) -> Result<()> {
    let h = formats::read_hierarchy(&args.hierarchy, args.allow_unary)?;
    let scores = formats::read_scores(&args.scores)?;
    let probs = scores_to_likelihoods(&h, &args.method, &scores)?;
    let rule = build_rule(args)?;
    let mut predictions = Vec::with_capacity(probs.rows());
    for i in 0..probs.rows() {
        predictions.push(infer(&h, probs.row(i), &rule)?);
    }
    formats::write_node_names(&args.output, &h, &predictions)?;
    println!("wrote {} predictions to {}", predictions.len(), args.output.display());
    Ok(())
}

pub fn cmd_synth(args: &args::SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        depth: args.depth,
        branching_min: args.branching_min,
        branching_max: args.branching_max,
        feature_dim: args.feature_dim,
        train_per_leaf: args.train_per_leaf,
        test_per_leaf: args.test_per_leaf,
        sigma_tree: args.sigma_tree,
        sigma_obs: args.sigma_obs,
        seed: args.seed,
    };
    let (h, train, test) = generate_synthetic(&spec)?;
    fs::create_dir_all(&args.output)?;
    formats::write_hierarchy(&args.output.join("hierarchy.csv"), &h)?;
    let ext = if args.binary { "bin" } else { "csv" };
    let write_features = |path: &Path, m: &Matrix| -> Result<()> {
        if args.binary {
            formats::write_scores_binary(path, m)
        } else {
            formats::write_scores_csv(path, m)
        }
    };
    write_features(&args.output.join(format!("train_features.{ext}")), &train.features)?;
    formats::write_node_names(&args.output.join("train_labels.txt"), &h, &train.labels)?;
    write_features(&args.output.join(format!("test_features.{ext}")), &test.features)?;
    formats::write_node_names(&args.output.join("test_labels.txt"), &h, &test.labels)?;
    println!(
        "wrote hierarchy (|Y|={} |L|={}) with {} train / {} test examples to {}",
        h.num_nodes(),
        h.num_leaves(),
        train.len(),
        test.len(),
        args.output.display()
    );
    Ok(())
}

fn build_loss(args: &args::TrainArgs) -> Result<LossSpec> {
    let spec = match args.loss.as_str() {
        "flat_nll" => LossSpec::FlatNll,
        "hxe" => LossSpec::Hxe {
            alpha: args.alpha.unwrap_or(0.1),
        },
        "multilabel_focal" => LossSpec::MultilabelFocal {
            alpha: args.alpha.unwrap_or(0.9),
            gamma: args.gamma.unwrap_or(1.0),
        },
        "cond_softmax_nll" => LossSpec::CondSoftmaxNll,
        "cond_sigmoid_bce" => LossSpec::CondSigmoidBce,
        "deeprtc" => LossSpec::DeepRtc {
            p_cut: args.p_cut.unwrap_or(0.5),
            num_samples: args.num_samples,
            seed: args.seed,
        },
        "soft_max_descendant" => LossSpec::SoftMaxDescendant,
        "soft_max_margin" => LossSpec::SoftMaxMargin {
            alpha: args.alpha.unwrap_or(5.0),
        },
        other => {
            return Err(CliError::usage(format!(
                "unknown loss {other:?}; valid options: flat_nll, hxe, multilabel_focal, \
                 cond_softmax_nll, cond_sigmoid_bce, deeprtc, soft_max_descendant, \
                 soft_max_margin"
            )))
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Drops a random fraction of leaves from the hierarchy, keeping everything
/// else; mirrors the unseen-class protocol where removed classes survive in
/// the test set with labels projected onto the sub-tree.
fn drop_leaves(h: &Hierarchy, fraction: f64, seed: u64) -> Result<Hierarchy> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(CliError::usage(format!(
            "drop-leaf-fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut leaves = h.leaves().to_vec();
    leaves.shuffle(&mut rng);
    let n_drop = (leaves.len() as f64 * fraction).floor() as usize;
    if leaves.len() - n_drop < 2 {
        return Err(CliError::data(
            "dropping that many leaves leaves fewer than two classes".into(),
        ));
    }
    let dropped: HashSet<usize> = leaves[..n_drop].iter().copied().collect();
    let edges: Vec<(String, Option<String>)> = (0..h.num_nodes())
        .filter(|y| !dropped.contains(y))
        .map(|y| {
            (
                h.name(y).to_owned(),
                h.parent(y).map(|p| h.name(p).to_owned()),
            )
        })
        .collect();
    // removing leaves can leave unary chains behind; accept them here
    Ok(Hierarchy::from_edges(&edges, true)?)
}

pub fn cmd_train(args: &args::TrainArgs) -> Result<()> {
    let h_full = formats::read_hierarchy(&args.hierarchy, args.allow_unary)?;
    let train_features = formats::read_scores(&args.train_features)?;
    let train_labels = formats::read_labels(&args.train_labels, &h_full)?;
    let test_features = formats::read_scores(&args.test_features)?;
    let test_labels = formats::read_labels(&args.test_labels, &h_full)?;
    if train_features.rows() != train_labels.len() || test_features.rows() != test_labels.len() {
        return Err(CliError::data("feature/label row counts differ".into()));
    }

    let method: Method = args.method.parse()?;
    let loss = build_loss(args)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        momentum: args.momentum,
        weight_decay: args.weight_decay,
        cosine_schedule: !args.no_cosine,
        seed: args.seed,
    };

    // Unseen-class protocol: train on a reduced hierarchy, evaluate on the
    // full test set with labels projected onto the sub-tree.
    let (h_train, train_set, eval_labels) = if args.drop_leaf_fraction > 0.0 {
        let h_sub = drop_leaves(&h_full, args.drop_leaf_fraction, args.drop_seed)?;
        let kept: Vec<usize> = train_labels
            .iter()
            .enumerate()
            .filter(|(_, &y)| h_sub.index_of(h_full.name(y)).is_some())
            .map(|(i, _)| i)
            .collect();
        let mut features = Matrix::zeros(kept.len(), train_features.cols());
        let mut labels = Vec::with_capacity(kept.len());
        for (row, &i) in kept.iter().enumerate() {
            features.row_mut(row).copy_from_slice(train_features.row(i));
            labels.push(h_sub.index_of(h_full.name(train_labels[i])).unwrap());
        }
        let proj = SubtreeProjection::new(&h_full, &h_sub)?;
        let eval_labels: Vec<usize> = test_labels.iter().map(|&y| proj.project(y)).collect();
        println!(
            "dropped {} of {} leaves; {} of {} training examples kept",
            h_full.num_leaves() - h_sub.num_leaves(),
            h_full.num_leaves(),
            labels.len(),
            train_labels.len()
        );
        (h_sub, Dataset { features, labels }, eval_labels)
    } else {
        (
            h_full.clone(),
            Dataset {
                features: train_features,
                labels: train_labels,
            },
            test_labels,
        )
    };

    let result = train_linear(&h_train, &train_set, method, &loss, &cfg)?;
    println!(
        "trained {} epochs: mean loss {:.6} -> {:.6}",
        cfg.epochs,
        result.epoch_losses.first().unwrap(),
        result.epoch_losses.last().unwrap()
    );

    fs::create_dir_all(&args.output)?;
    let test_scores = predict_scores(&result.model, &test_features);
    formats::write_scores_csv(&args.output.join("scores.csv"), &test_scores)?;

    let probs = likelihood_batch(&h_train, method, &test_scores)?;
    let kinds = parse_metrics(&args.metrics)?;
    let f1_mode = parse_f1_mode(&args.f1_mode)?;
    let report = write_evaluation(
        &h_train,
        &eval_labels,
        &probs,
        &kinds,
        args.tau_min,
        f1_mode,
        &args.method,
        &args.output,
    )?;
    println!("wrote {}", report.display());
    Ok(())
}

pub fn cmd_plot(args: &args::PlotArgs) -> Result<()> {
    let first = formats::read_report_csv(&args.report)?;
    let second = match &args.report2 {
        Some(path) => Some(formats::read_report_csv(path)?),
        None => None,
    };
    let svg = match (&args.metric, &args.x, &args.y) {
        (Some(metric), None, None) => plot::step_plot(&first, second.as_ref(), metric)?,
        (None, Some(x), Some(y)) => plot::pair_plot(&first, second.as_ref(), x, y)?,
        _ => {
            return Err(CliError::usage(
                "pass either --metric NAME for a threshold plot or both --x and --y for a \
                 parametric plot"
                    .into(),
            ))
        }
    };
    fs::write(&args.output, svg)?;
    println!("wrote {}", args.output.display());
    Ok(())
}
