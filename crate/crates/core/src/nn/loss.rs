use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use ndarray::{Array2, Zip};

use super::NnError;

/// Lower and upper clamp applied to probabilities on the training path.
pub const PROBABILITY_CLAMP: f64 = 1e-12;

/// A loss summed over the rows of a batch.
pub trait Loss: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// The exact loss. Fails where it is undefined.
    fn value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Result<f64, NnError>;

    /// The loss as minimized during training, with any numerical guards.
    fn training_value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> f64;

    /// `dL/dprediction` of [`Loss::training_value`].
    fn gradient(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Array2<f64>;

    /// `dL/dz` at the output pre-activation when the head and loss combine
    /// into a simpler closed form.
    fn fused_delta(
        &self,
        _output_activation: &str,
        _prediction: &Array2<f64>,
        _target: &Array2<f64>,
    ) -> Option<Array2<f64>> {
        None
    }
}

pub(crate) fn check_shapes(prediction: &Array2<f64>, target: &Array2<f64>) -> Result<(), NnError> {
    if prediction.dim() == target.dim() {
        Ok(())
    } else {
        Err(NnError::DimensionMismatch {
            expected: format!("{:?}", prediction.dim()),
            found: format!("{:?}", target.dim()),
        })
    }
}

#[derive(Debug)]
pub struct MeanSquared;

impl Loss for MeanSquared {
    fn name(&self) -> &'static str {
        "mse"
    }

    fn value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Result<f64, NnError> {
        check_shapes(prediction, target)?;
        Ok(self.training_value(prediction, target))
    }

    fn training_value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> f64 {
        Zip::from(prediction)
            .and(target)
            .fold(0.0, |acc, &p, &y| acc + (p - y) * (p - y))
    }

    fn gradient(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Array2<f64> {
        Zip::from(prediction)
            .and(target)
            .map_collect(|&p, &y| 2.0 * (p - y))
    }
}

/// Cross-entropy. A single output column is read as the probability of the
/// positive class and scored with the two-class form.
#[derive(Debug)]
pub struct CrossEntropy;

fn clamp(p: f64) -> f64 {
    p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
}

impl Loss for CrossEntropy {
    fn name(&self) -> &'static str {
        "cross_entropy"
    }

    fn value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Result<f64, NnError> {
        check_shapes(prediction, target)?;
        let binary = prediction.ncols() == 1;
        let mut total = 0.0;
        for (&p, &y) in prediction.iter().zip(target.iter()) {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(NnError::DomainError(format!("probability {p} outside [0, 1]")));
            }
            let terms: [(f64, f64); 2] = if binary {
                [(y, p), (1.0 - y, 1.0 - p)]
            } else {
                [(y, p), (0.0, 1.0)]
            };
            for (weight, q) in terms {
                if weight == 0.0 {
                    continue;
                }
                if q <= 0.0 {
                    return Err(NnError::DomainError(format!("ln of {q} with weight {weight}")));
                }
                total -= weight * q.ln();
            }
        }
        Ok(total)
    }

    fn training_value(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> f64 {
        let binary = prediction.ncols() == 1;
        Zip::from(prediction).and(target).fold(0.0, |acc, &p, &y| {
            let p = clamp(p);
            if binary {
                acc - (y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            } else {
                acc - y * p.ln()
            }
        })
    }

    fn gradient(&self, prediction: &Array2<f64>, target: &Array2<f64>) -> Array2<f64> {
        let binary = prediction.ncols() == 1;
        Zip::from(prediction).and(target).map_collect(|&p, &y| {
            let p = clamp(p);
            if binary {
                -y / p + (1.0 - y) / (1.0 - p)
            } else {
                -y / p
            }
        })
    }

    fn fused_delta(
        &self,
        output_activation: &str,
        prediction: &Array2<f64>,
        target: &Array2<f64>,
    ) -> Option<Array2<f64>> {
        let fused = match output_activation {
            "sigmoid" => prediction.ncols() == 1,
            // p - y assumes each target row sums to one
            "softmax" => target.rows().into_iter().all(|r| (r.sum() - 1.0).abs() < 1e-9),
            _ => false,
        };
        fused.then(|| prediction - target)
    }
}

#[derive(Clone, Default)]
pub struct LossRegistry {
    entries: BTreeMap<String, Arc<dyn Loss>>,
}

impl LossRegistry {
    pub fn with_defaults() -> Self {
        let mut registry = Self::default();
        registry.register(Arc::new(MeanSquared));
        registry.register(Arc::new(CrossEntropy));
        registry
    }

    pub fn register(&mut self, loss: Arc<dyn Loss>) {
        self.entries.insert(loss.name().to_string(), loss);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Loss>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

static LOSSES: LazyLock<LossRegistry> = LazyLock::new(LossRegistry::with_defaults);

pub fn losses() -> &'static LossRegistry {
    &LOSSES
}

pub fn loss_by_name(name: &str) -> Result<Arc<dyn Loss>, NnError> {
    losses()
        .get(name)
        .ok_or_else(|| NnError::UnknownLoss(name.to_string()))
}
