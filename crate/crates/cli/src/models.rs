use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use knotnet_core::dataset::{
    knot_predictions, predict_rows, relation_report, split_by_knot, AugmentedDataset,
    KnotPrediction, KnotRecord,
};
use knotnet_core::encoding::INPUT_DIM;
use knotnet_core::model::{training_fingerprint, EncodingOptions, ModelFile, NormalizationScope};
use knotnet_core::nn::{init_network, train as train_network, Network, TrainConfig};
use knotnet_core::rng::derive_seed;
use knotnet_core::target::{accuracy, labelled_matrices, targets, InvariantTarget};

use crate::data::{augment_records, load_records};
use crate::{CliError, CliResult, CommonArgs, PaddingArg, TargetArg};

pub(crate) struct TrainArgs<'a> {
    pub data: &'a Path,
    pub target: TargetArg,
    pub model: &'a Path,
    pub repeats: usize,
    pub final_full_data: bool,
    pub normalize_all: bool,
    pub padding: PaddingArg,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "nan".into())
}

pub(crate) fn train(
    common: &CommonArgs,
    args: &TrainArgs<'_>,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let target = targets().get(args.target.name()).expect("built-in target");
    let records = load_records(args.data, stderr)?;
    let mut data = augment_records(common, &records, args.padding.into())?;
    let spec = target.default_spec(common.hidden.as_deref(), common.dropout);
    let base_config = TrainConfig {
        epochs: common.epochs.unwrap_or_else(|| target.epochs()),
        batch_size: common.batch_size,
        learning_rate: common.lr,
        loss: target.loss().to_string(),
        seed: common.seed,
        ..TrainConfig::default()
    };
    let scope = if args.normalize_all {
        NormalizationScope::All
    } else {
        NormalizationScope::Train
    };
    let labelled = |l: &_| target.label(l).is_some();

    writeln!(out, "run\tseed\ttrain_rows\ttest_rows\tfinal_loss\taccuracy")?;
    let mut accuracies = Vec::new();
    let mut saved = None;
    let runs = (0..args.repeats).map(|r| (r.to_string(), common.seed.wrapping_add(r as u64), common.test_knots));
    let final_run = args
        .final_full_data
        .then(|| ("final".to_string(), common.seed, 0));
    for (label, seed, test_knots) in runs.chain(final_run) {
        let split = split_by_knot(&data, test_knots, seed, labelled).map_err(CliError::data)?;
        let stats_rows: Vec<usize> = match scope {
            NormalizationScope::Train => split.train.clone(),
            NormalizationScope::All => (0..data.len()).collect(),
        };
        let stats = data.fit_stats(&stats_rows).map_err(CliError::data)?;
        data.renormalize(stats.clone()).map_err(CliError::data)?;
        let (x, y) = labelled_matrices(target.as_ref(), &data, &split.train);
        let network = init_network(&spec, derive_seed(seed, "init")).map_err(CliError::data)?;
        let config = TrainConfig {
            seed: derive_seed(seed, "train"),
            ..base_config.clone()
        };
        let (network, history) = train_network(network, &x, &y, &config).map_err(CliError::data)?;
        let acc = accuracy(target.as_ref(), &network, &data, &split.test, common.cutoff).map_err(CliError::data)?;
        if label != "final" {
            accuracies.extend(acc);
        }
        writeln!(
            out,
            "{label}\t{seed}\t{}\t{}\t{}\t{}",
            split.train.len(),
            split.test.len(),
            fmt_opt(history.last().map(|h| h.mean_loss)),
            fmt_opt(acc)
        )?;
        if saved.is_none() || label == "final" {
            saved = Some(ModelFile::new(
                target.name(),
                &network,
                stats,
                scope,
                EncodingOptions {
                    padding: args.padding.into(),
                },
                config,
                training_fingerprint(&data, &split.train),
            ));
        }
    }
    if !accuracies.is_empty() {
        let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        writeln!(out, "# mean_accuracy\t{mean:.6}")?;
    }
    let model = saved.expect("at least one run");
    model
        .save(args.model)
        .map_err(|e| CliError::data(format!("{}: {e}", args.model.display())))?;
    Ok(())
}

pub(crate) fn load_model(path: &Path) -> CliResult<(ModelFile, Network, Arc<dyn InvariantTarget>)> {
    let fail = |m: String| CliError::data(format!("{}: {m}", path.display()));
    let model = ModelFile::load(path).map_err(|e| fail(e.to_string()))?;
    let network = model.network().map_err(|e| fail(e.to_string()))?;
    let target = targets()
        .get(&model.target)
        .ok_or_else(|| fail(format!("unknown target {:?}", model.target)))?;
    if model.spec.input_dim() != INPUT_DIM || model.spec.output_dim() != 1 {
        return Err(fail(format!(
            "incompatible model: expected {INPUT_DIM} inputs and 1 output, found {:?}",
            model.spec.layer_sizes
        )));
    }
    Ok((model, network, target))
}

/// The augmented records, encoded the way `model` expects.
pub(crate) fn model_dataset(
    common: &CommonArgs,
    model: &ModelFile,
    records: &[KnotRecord],
) -> CliResult<AugmentedDataset> {
    let mut data = augment_records(common, records, model.encoding.padding)?;
    data.renormalize(model.normalization.clone()).map_err(CliError::data)?;
    Ok(data)
}

fn selected(predictions: Vec<KnotPrediction>, knots: Option<&[String]>) -> CliResult<Vec<KnotPrediction>> {
    let Some(knots) = knots else {
        return Ok(predictions);
    };
    knots
        .iter()
        .map(|name| {
            predictions
                .iter()
                .find(|p| &p.name == name)
                .cloned()
                .ok_or_else(|| CliError::data(format!("unknown knot {name}")))
        })
        .collect()
}

fn predictions_for(
    common: &CommonArgs,
    model_path: &Path,
    data: &Path,
    knots: Option<&[String]>,
    stderr: &mut dyn Write,
) -> CliResult<(Arc<dyn InvariantTarget>, Vec<KnotPrediction>)> {
    let (model, network, target) = load_model(model_path)?;
    let records = load_records(data, stderr)?;
    let dataset = model_dataset(common, &model, &records)?;
    let predictions = knot_predictions(&network, &dataset).map_err(CliError::data)?;
    Ok((target, selected(predictions, knots)?))
}

pub(crate) fn predict(
    common: &CommonArgs,
    model: &Path,
    data: &Path,
    knots: Option<&[String]>,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let (target, predictions) = predictions_for(common, model, data, knots, stderr)?;
    if target.name() == "qp" {
        writeln!(out, "knot\tmean_probability\tstd\tquasipositive")?;
    } else {
        writeln!(out, "knot\tmean_{}\tstd\trounded", target.name())?;
    }
    for p in predictions {
        writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{}",
            p.name,
            p.mean,
            p.std,
            target.verdict(p.mean, common.cutoff)
        )?;
    }
    Ok(())
}

pub(crate) fn rank_nonslice(
    common: &CommonArgs,
    model: &Path,
    data: &Path,
    knots: Option<&[String]>,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let (target, mut predictions) = predictions_for(common, model, data, knots, stderr)?;
    if target.name() != "g4" {
        return Err(CliError::data(format!(
            "rank-nonslice needs a g4 model, found {}",
            target.name()
        )));
    }
    predictions.sort_by(|a, b| {
        (a.mean - 1.0)
            .abs()
            .total_cmp(&(b.mean - 1.0).abs())
            .then_with(|| a.name.cmp(&b.name))
    });
    writeln!(out, "knot\tmean_g4\tstd\tdistance_from_1")?;
    for p in predictions {
        writeln!(out, "{}\t{:.6}\t{:.6}\t{:.6}", p.name, p.mean, p.std, (p.mean - 1.0).abs())?;
    }
    Ok(())
}

pub(crate) fn check_relations(
    common: &CommonArgs,
    g_model: &Path,
    tau_model: &Path,
    data: &Path,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let (g_file, g_network, g_target) = load_model(g_model)?;
    let (tau_file, tau_network, tau_target) = load_model(tau_model)?;
    if g_target.name() != "g4" || tau_target.name() != "tau" {
        return Err(CliError::data(format!(
            "expected g4 and tau models, found {} and {}",
            g_target.name(),
            tau_target.name()
        )));
    }
    let records = load_records(data, stderr)?;
    let g_data = model_dataset(common, &g_file, &records)?;
    let tau_data = model_dataset(common, &tau_file, &records)?;
    let all: Vec<usize> = (0..g_data.len()).collect();
    let g = predict_rows(&g_network, &g_data, &all).map_err(CliError::data)?;
    let tau = predict_rows(&tau_network, &tau_data, &all).map_err(CliError::data)?;
    let report = relation_report(&g_data, &g, &tau);
    writeln!(out, "# rows\t{}", report.rows)?;
    writeln!(
        out,
        "# tau_violations\t{}\t{:.6}",
        report.tau_violations.len(),
        report.tau_violation_rate()
    )?;
    writeln!(out, "# rasmussen_violations\t{}", report.rasmussen_violations.len())?;
    writeln!(out, "kind\tknot\trep\tg4\ttau\ts")?;
    let kinds = [("tau", &report.tau_violations), ("rasmussen", &report.rasmussen_violations)];
    for (kind, rows) in kinds {
        for v in rows {
            writeln!(out, "{kind}\t{}\t{}\t{}\t{}\t{}", v.name, v.rep, v.g4, v.tau, v.rasmussen_s)?;
        }
    }
    Ok(())
}
