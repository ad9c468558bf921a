use std::sync::Arc;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::{loss_by_name, Loss};
use super::network::{Mode, Network};
use super::{classify, NnError, DEFAULT_CUTOFF};
use crate::rng::{seeded, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_adam: f64,
    /// Name in the loss registry.
    pub loss: String,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            epochs: 1,
            batch_size: 32,
            learning_rate: adam.learning_rate,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon_adam: adam.epsilon,
            loss: "mse".to_string(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon_adam,
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch size must be positive".into()));
        }
        self.adam().validate()?;
        loss_by_name(&self.loss).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Training loss per sample.
    pub mean_loss: f64,
    /// Fraction of samples on the right side of the cutoff, for
    /// classification losses.
    pub accuracy: Option<f64>,
}

/// Mini-batch Adam over a fixed dataset, one epoch at a time.
pub struct Trainer {
    network: Network,
    state: AdamState,
    rng: SeededRng,
    config: TrainConfig,
    loss: Arc<dyn Loss>,
    epochs_run: usize,
}

impl Trainer {
    pub fn new(network: Network, config: TrainConfig) -> Result<Self, NnError> {
        config.validate()?;
        let loss = loss_by_name(&config.loss)?;
        Ok(Self {
            state: AdamState::new(network.params()),
            rng: seeded(config.seed),
            network,
            config,
            loss,
            epochs_run: 0,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn into_network(self) -> Network {
        self.network
    }

    pub fn run_epoch(&mut self, inputs: &Array2<f64>, targets: &Array2<f64>) -> Result<EpochStats, NnError> {
        let n = inputs.nrows();
        if n == 0 {
            return Err(NnError::EmptyDataset);
        }
        if targets.nrows() != n {
            return Err(NnError::DimensionMismatch {
                expected: format!("{n} target rows"),
                found: format!("{}", targets.nrows()),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let classifying = self.loss.name() == "cross_entropy";
        let mut total_loss = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(self.config.batch_size) {
            let x = inputs.select(Axis(0), batch);
            let y = targets.select(Axis(0), batch);
            let cache = self.network.forward(&x, Mode::Train(&mut self.rng))?;
            let output = cache.output();
            total_loss += self.loss.training_value(output, &y);
            if classifying {
                correct += count_correct(output, &y);
            }
            let grads = self.network.backward(&cache, &y, self.loss.as_ref())?;
            adam_step(self.network.params_mut(), &grads, &mut self.state, &self.config.adam());
        }
        self.epochs_run += 1;
        Ok(EpochStats {
            epoch: self.epochs_run,
            mean_loss: total_loss / n as f64,
            accuracy: classifying.then(|| correct as f64 / n as f64),
        })
    }
}

fn row_correct(p: ArrayView1<f64>, y: ArrayView1<f64>) -> bool {
    if p.len() == 1 {
        classify(p[0], DEFAULT_CUTOFF) == (y[0] >= DEFAULT_CUTOFF)
    } else {
        argmax(p) == argmax(y)
    }
}

fn argmax(v: ArrayView1<f64>) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

/// Rows whose prediction lands on the target's side of the cutoff, or
/// whose argmax matches for multi-class outputs.
pub fn count_correct(prediction: &Array2<f64>, target: &Array2<f64>) -> usize {
    prediction
        .rows()
        .into_iter()
        .zip(target.rows())
        .filter(|(p, y)| row_correct(p.view(), y.view()))
        .count()
}

/// Trains for `config.epochs` epochs and returns the per-epoch history.
pub fn train(
    network: Network,
    inputs: &Array2<f64>,
    targets: &Array2<f64>,
    config: &TrainConfig,
) -> Result<(Network, Vec<EpochStats>), NnError> {
    if inputs.nrows() == 0 {
        return Err(NnError::EmptyDataset);
    }
    let mut trainer = Trainer::new(network, config.clone())?;
    let history = (0..config.epochs)
        .map(|_| trainer.run_epoch(inputs, targets))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((trainer.into_network(), history))
}
