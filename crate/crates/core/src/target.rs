//! The predicted invariants and their default network presets.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use ndarray::Array2;

use crate::dataset::{predict_rows, AugmentedDataset, DatasetError, Labels};
use crate::encoding::INPUT_DIM;
use crate::nn::{classify, round_half_up, Network, NetworkSpec, TrainConfig};

pub const DEFAULT_DROPOUT: f64 = 0.5;

pub trait InvariantTarget: Send + Sync + fmt::Debug {
    /// Registry key: `qp`, `g4` or `tau`.
    fn name(&self) -> &'static str;

    fn hidden_layers(&self) -> Vec<usize>;

    fn hidden_activation(&self) -> &'static str {
        "relu"
    }

    fn output_activation(&self) -> &'static str;

    fn loss(&self) -> &'static str;

    fn epochs(&self) -> usize;

    /// The training target, if the record carries it.
    fn label(&self, labels: &Labels) -> Option<f64>;

    fn is_correct(&self, prediction: f64, label: f64, cutoff: f64) -> bool;

    /// Human-readable reading of a (mean) prediction.
    fn verdict(&self, prediction: f64, cutoff: f64) -> String;

    fn default_spec(&self, hidden: Option<&[usize]>, dropout: f64) -> NetworkSpec {
        let hidden = hidden.map(<[usize]>::to_vec).unwrap_or_else(|| self.hidden_layers());
        NetworkSpec::dense(
            INPUT_DIM,
            &hidden,
            1,
            self.hidden_activation(),
            self.output_activation(),
            dropout,
        )
    }

    fn default_train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs(),
            loss: self.loss().to_string(),
            seed,
            ..TrainConfig::default()
        }
    }
}

/// Quasipositivity as a probability.
#[derive(Debug)]
pub struct Quasipositive;

impl InvariantTarget for Quasipositive {
    fn name(&self) -> &'static str {
        "qp"
    }

    fn hidden_layers(&self) -> Vec<usize> {
        vec![500, 500]
    }

    fn output_activation(&self) -> &'static str {
        "sigmoid"
    }

    fn loss(&self) -> &'static str {
        "cross_entropy"
    }

    fn epochs(&self) -> usize {
        26
    }

    fn label(&self, labels: &Labels) -> Option<f64> {
        labels.quasipositive.map(|q| if q { 1.0 } else { 0.0 })
    }

    fn is_correct(&self, prediction: f64, label: f64, cutoff: f64) -> bool {
        classify(prediction, cutoff) == (label >= 0.5)
    }

    fn verdict(&self, prediction: f64, cutoff: f64) -> String {
        classify(prediction, cutoff).to_string()
    }
}

/// Integer invariants regressed with squared error and read by rounding.
#[derive(Debug)]
pub struct Regression {
    name: &'static str,
    hidden: usize,
    epochs: usize,
    label: fn(&Labels) -> Option<i64>,
}

pub const SLICE_GENUS: Regression = Regression {
    name: "g4",
    hidden: 500,
    epochs: 27,
    label: |l| l.g4,
};

pub const TAU: Regression = Regression {
    name: "tau",
    hidden: 750,
    epochs: 37,
    label: |l| l.tau,
};

impl InvariantTarget for Regression {
    fn name(&self) -> &'static str {
        self.name
    }

    fn hidden_layers(&self) -> Vec<usize> {
        vec![self.hidden; 2]
    }

    fn output_activation(&self) -> &'static str {
        "identity"
    }

    fn loss(&self) -> &'static str {
        "mse"
    }

    fn epochs(&self) -> usize {
        self.epochs
    }

    fn label(&self, labels: &Labels) -> Option<f64> {
        (self.label)(labels).map(|v| v as f64)
    }

    fn is_correct(&self, prediction: f64, label: f64, _cutoff: f64) -> bool {
        round_half_up(prediction) as f64 == label
    }

    fn verdict(&self, prediction: f64, _cutoff: f64) -> String {
        round_half_up(prediction).to_string()
    }
}

#[derive(Clone, Default)]
pub struct TargetRegistry {
    entries: BTreeMap<&'static str, Arc<dyn InvariantTarget>>,
}

impl TargetRegistry {
    pub fn with_defaults() -> Self {
        let mut registry = Self::default();
        registry.register(Arc::new(Quasipositive));
        registry.register(Arc::new(SLICE_GENUS));
        registry.register(Arc::new(TAU));
        registry
    }

    pub fn register(&mut self, target: Arc<dyn InvariantTarget>) {
        self.entries.insert(target.name(), target);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn InvariantTarget>> {
        self.entries.get(name.to_ascii_lowercase().as_str()).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

static TARGETS: LazyLock<TargetRegistry> = LazyLock::new(TargetRegistry::with_defaults);

pub fn targets() -> &'static TargetRegistry {
    &TARGETS
}

/// Inputs and single-column labels for the rows carrying `target`'s label.
pub fn labelled_matrices(
    target: &dyn InvariantTarget,
    data: &AugmentedDataset,
    rows: &[usize],
) -> (Array2<f64>, Array2<f64>) {
    let kept: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&i| target.label(&data.rows[i].labels).is_some())
        .collect();
    let labels = kept
        .iter()
        .map(|&i| target.label(&data.rows[i].labels).expect("filtered"))
        .collect();
    let labels = Array2::from_shape_vec((kept.len(), 1), labels).expect("one label per row");
    (data.inputs(&kept), labels)
}

/// Fraction of labelled `rows` the network gets right under the target's
/// rule, or `None` when no row is labelled.
pub fn accuracy(
    target: &dyn InvariantTarget,
    network: &Network,
    data: &AugmentedDataset,
    rows: &[usize],
    cutoff: f64,
) -> Result<Option<f64>, DatasetError> {
    let kept: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|&i| target.label(&data.rows[i].labels).map(|l| (i, l)))
        .collect();
    if kept.is_empty() {
        return Ok(None);
    }
    let indices: Vec<usize> = kept.iter().map(|&(i, _)| i).collect();
    let predictions = predict_rows(network, data, &indices)?;
    let correct = predictions
        .iter()
        .zip(&kept)
        .filter(|(&p, &(_, label))| target.is_correct(p, label, cutoff))
        .count();
    Ok(Some(correct as f64 / kept.len() as f64))
}
