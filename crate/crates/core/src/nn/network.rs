use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::activation::{activations, Activation};
use super::loss::{check_shapes, Loss};
use super::NnError;
use crate::rng::{seeded, SeededRng};

/// Layer sizes `n_0..n_q`, one activation name per layer `1..q` and one
/// dropout rate per hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub activations: Vec<String>,
    pub dropout_rates: Vec<f64>,
}

impl NetworkSpec {
    /// Hidden layers share one activation and dropout rate.
    pub fn dense(
        input: usize,
        hidden: &[usize],
        output: usize,
        hidden_activation: &str,
        output_activation: &str,
        dropout: f64,
    ) -> Self {
        let mut layer_sizes = vec![input];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(output);
        let mut activations = vec![hidden_activation.to_string(); hidden.len()];
        activations.push(output_activation.to_string());
        Self {
            layer_sizes,
            activations,
            dropout_rates: vec![dropout; hidden.len()],
        }
    }

    pub fn depth(&self) -> usize {
        self.layer_sizes.len().saturating_sub(1)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes.first().copied().unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        self.layer_sizes.last().copied().unwrap_or(0)
    }

    pub fn output_activation(&self) -> &str {
        self.activations.last().map(String::as_str).unwrap_or("")
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let invalid = |m: String| Err(NnError::InvalidSpec(m));
        let q = self.depth();
        if q == 0 {
            return invalid("at least one layer is required".into());
        }
        if self.layer_sizes.contains(&0) {
            return invalid("layer sizes must be positive".into());
        }
        if self.activations.len() != q {
            return invalid(format!("{} activations for {q} layers", self.activations.len()));
        }
        if self.dropout_rates.len() != q - 1 {
            return invalid(format!(
                "{} dropout rates for {} hidden layers",
                self.dropout_rates.len(),
                q - 1
            ));
        }
        if let Some(r) = self.dropout_rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return invalid(format!("dropout rate {r} outside [0, 1)"));
        }
        for (j, name) in self.activations.iter().enumerate() {
            let activation = activations()
                .get(name)
                .ok_or_else(|| NnError::UnknownActivation(name.clone()))?;
            if activation.output_only() && j + 1 != q {
                return invalid(format!("{name} is only allowed on the output layer"));
            }
        }
        Ok(())
    }
}

/// Weight matrices `A_j` of shape `n_j × n_{j-1}` and bias vectors `b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl NetworkParams {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        let pairs = spec.layer_sizes.windows(2);
        Self {
            weights: pairs.clone().map(|w| Array2::zeros((w[1], w[0]))).collect(),
            biases: pairs.map(|w| Array1::zeros(w[1])).collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.iter().map(Array2::len).sum::<usize>()
            + self.biases.iter().map(Array1::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    /// All entries layer by layer: weights in row-major order, then biases.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
    }

    fn slot(&mut self, mut index: usize) -> Option<&mut f64> {
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            if index < w.len() {
                let cols = w.ncols();
                return w.get_mut((index / cols, index % cols));
            }
            index -= w.len();
            if index < b.len() {
                return b.get_mut(index);
            }
            index -= b.len();
        }
        None
    }

    /// Reads entry `index` in [`NetworkParams::values`] order.
    pub fn get_flat(&self, index: usize) -> Option<f64> {
        self.values().nth(index)
    }

    pub fn set_flat(&mut self, index: usize, value: f64) -> bool {
        match self.slot(index) {
            Some(slot) => {
                *slot = value;
                true
            }
            None => false,
        }
    }

    fn check_against(&self, spec: &NetworkSpec) -> Result<(), NnError> {
        let expected = NetworkParams::zeros(spec);
        let shapes_match = self.weights.len() == expected.weights.len()
            && self.biases.len() == expected.biases.len()
            && self.weights.iter().zip(&expected.weights).all(|(a, b)| a.dim() == b.dim())
            && self.biases.iter().zip(&expected.biases).all(|(a, b)| a.len() == b.len());
        if !shapes_match {
            return Err(NnError::InvalidSpec("parameter shapes do not match the spec".into()));
        }
        if !self.is_finite() {
            return Err(NnError::NonFinite);
        }
        Ok(())
    }
}

/// Gradients share the layout of the parameters.
pub type Gradients = NetworkParams;

pub enum Mode<'a> {
    Infer,
    /// Samples fresh dropout masks from the generator.
    Train(&'a mut SeededRng),
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Array2<f64>,
    /// Pre-activations `T_j(x)` per layer.
    pub pre: Vec<Array2<f64>>,
    /// `h_j(T_j(x))` before any dropout.
    pub activated: Vec<Array2<f64>>,
    /// Inverted-dropout masks, already scaled by `1/(1-rate)`.
    pub masks: Vec<Option<Array2<f64>>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activated.last().expect("networks have at least one layer")
    }

    /// The value fed to layer `j + 1` (0-based `j`).
    fn layer_output(&self, j: usize) -> Array2<f64> {
        match &self.masks[j] {
            Some(mask) => &self.activated[j] * mask,
            None => self.activated[j].clone(),
        }
    }
}

/// A validated spec together with its parameters.
#[derive(Debug, Clone)]
pub struct Network {
    spec: NetworkSpec,
    params: NetworkParams,
    activations: Vec<Arc<dyn Activation>>,
}

impl Network {
    pub fn new(spec: NetworkSpec, params: NetworkParams) -> Result<Self, NnError> {
        spec.validate()?;
        params.check_against(&spec)?;
        let activations = spec
            .activations
            .iter()
            .map(|name| activations().get(name).expect("validated"))
            .collect();
        Ok(Self {
            spec,
            params,
            activations,
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut NetworkParams {
        &mut self.params
    }

    pub fn into_parts(self) -> (NetworkSpec, NetworkParams) {
        (self.spec, self.params)
    }

    pub fn forward(&self, inputs: &Array2<f64>, mut mode: Mode<'_>) -> Result<ForwardCache, NnError> {
        if inputs.ncols() != self.spec.input_dim() {
            return Err(NnError::DimensionMismatch {
                expected: format!("{} input columns", self.spec.input_dim()),
                found: format!("{}", inputs.ncols()),
            });
        }
        let q = self.spec.depth();
        let mut cache = ForwardCache {
            input: inputs.clone(),
            pre: Vec::with_capacity(q),
            activated: Vec::with_capacity(q),
            masks: Vec::with_capacity(q),
        };
        for j in 0..q {
            let x = if j == 0 {
                inputs.clone()
            } else {
                cache.layer_output(j - 1)
            };
            let z = x.dot(&self.params.weights[j].t()) + &self.params.biases[j];
            let a = self.activations[j].apply(&z);
            let mask = match (&mut mode, self.spec.dropout_rates.get(j)) {
                (Mode::Train(rng), Some(&rate)) if rate > 0.0 => {
                    Some(dropout_mask(a.dim(), rate, rng))
                }
                _ => None,
            };
            cache.pre.push(z);
            cache.activated.push(a);
            cache.masks.push(mask);
        }
        Ok(cache)
    }

    /// Inference on a batch of rows.
    pub fn predict(&self, inputs: &Array2<f64>) -> Result<Array2<f64>, NnError> {
        let mut cache = self.forward(inputs, Mode::Infer)?;
        Ok(cache.activated.pop().expect("networks have at least one layer"))
    }

    /// Reverse-mode gradients of `loss.training_value` at the cached pass.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        target: &Array2<f64>,
        loss: &dyn Loss,
    ) -> Result<Gradients, NnError> {
        let output = cache.output();
        check_shapes(output, target)?;
        let q = self.spec.depth();
        let mut grads = self.params.zeros_like();
        let mut delta = match loss.fused_delta(self.spec.output_activation(), output, target) {
            Some(d) => d,
            None => {
                let upstream = loss.gradient(output, target);
                self.activations[q - 1].backward(&cache.pre[q - 1], output, &upstream)
            }
        };
        for j in (0..q).rev() {
            let x = if j == 0 {
                cache.input.clone()
            } else {
                cache.layer_output(j - 1)
            };
            grads.weights[j] = delta.t().dot(&x);
            grads.biases[j] = delta.sum_axis(Axis(0));
            if j > 0 {
                let mut upstream = delta.dot(&self.params.weights[j]);
                if let Some(mask) = &cache.masks[j - 1] {
                    upstream *= mask;
                }
                delta = self.activations[j - 1].backward(
                    &cache.pre[j - 1],
                    &cache.activated[j - 1],
                    &upstream,
                );
            }
        }
        Ok(grads)
    }

    /// Loss of an inference pass, as minimized in training.
    pub fn loss(&self, inputs: &Array2<f64>, target: &Array2<f64>, loss: &dyn Loss) -> Result<f64, NnError> {
        let output = self.predict(inputs)?;
        check_shapes(&output, target)?;
        Ok(loss.training_value(&output, target))
    }
}

pub fn dropout_mask(dim: (usize, usize), rate: f64, rng: &mut SeededRng) -> Array2<f64> {
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    Array2::from_shape_simple_fn(dim, || if rng.random_bool(keep) { scale } else { 0.0 })
}

/// He-normal weights for ReLU layers and Glorot-normal otherwise, zero
/// biases.
pub fn init_network(spec: &NetworkSpec, seed: u64) -> Result<Network, NnError> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let mut params = NetworkParams::zeros(spec);
    for (j, weights) in params.weights.iter_mut().enumerate() {
        let std = init_std(&spec.activations[j], spec.layer_sizes[j], spec.layer_sizes[j + 1]);
        let normal = Normal::new(0.0, std).expect("positive std");
        weights.mapv_inplace(|_| normal.sample(&mut rng));
    }
    Network::new(spec.clone(), params)
}

pub fn init_std(activation: &str, fan_in: usize, fan_out: usize) -> f64 {
    if activation == "relu" {
        (2.0 / fan_in as f64).sqrt()
    } else {
        (2.0 / (fan_in + fan_out) as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::loss::MeanSquared;
    use ndarray::array;

    fn spec_632() -> NetworkSpec {
        NetworkSpec::dense(6, &[4, 3], 2, "tanh", "identity", 0.0)
    }

    #[test]
    fn validation() {
        assert!(spec_632().validate().is_ok());
        let mut bad = spec_632();
        bad.activations[0] = "softmax".into();
        assert!(matches!(bad.validate(), Err(NnError::InvalidSpec(_))));
        let mut bad = spec_632();
        bad.activations[1] = "swish".into();
        assert!(matches!(bad.validate(), Err(NnError::UnknownActivation(_))));
        let mut bad = spec_632();
        bad.dropout_rates[0] = 1.0;
        assert!(bad.validate().is_err());
        let bad = NetworkSpec {
            layer_sizes: vec![3],
            activations: vec![],
            dropout_rates: vec![],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let spec = NetworkSpec::dense(2, &[], 2, "", "identity", 0.0);
        let mut params = NetworkParams::zeros(&spec);
        params.weights[0] = Array2::eye(2);
        let net = Network::new(spec, params).unwrap();
        let x = array![[1.5, -2.0]];
        assert_eq!(net.predict(&x).unwrap(), x);
        assert!(matches!(
            net.predict(&array![[1.0]]),
            Err(NnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let a = init_network(&spec_632(), 3).unwrap();
        let b = init_network(&spec_632(), 3).unwrap();
        let c = init_network(&spec_632(), 4).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), c.params());
        assert!(a.params().biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn init_scale_for_wide_layer() {
        let spec = NetworkSpec::dense(240, &[500], 1, "relu", "sigmoid", 0.5);
        let net = init_network(&spec, 11).unwrap();
        let w = &net.params().weights[0];
        assert_eq!(w.dim(), (500, 240));
        let n = w.len() as f64;
        let mean = w.sum() / n;
        let std = (w.mapv(|v| (v - mean).powi(2)).sum() / n).sqrt();
        let target = (2.0f64 / 240.0).sqrt();
        assert!((std / target - 1.0).abs() < 0.2, "{std} vs {target}");
    }

    #[test]
    fn flat_indexing_covers_every_entry() {
        let mut params = NetworkParams::zeros(&spec_632());
        let n = params.len();
        assert_eq!(n, spec_632().param_count());
        for i in 0..n {
            assert!(params.set_flat(i, i as f64));
        }
        assert!(!params.set_flat(n, 0.0));
        assert_eq!(params.values().collect::<Vec<_>>(), (0..n).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(params.get_flat(5), Some(5.0));
    }

    #[test]
    fn zero_gradient_at_optimum() {
        let net = init_network(&spec_632(), 1).unwrap();
        let x = array![[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]];
        let cache = net.forward(&x, Mode::Infer).unwrap();
        let target = cache.output().clone();
        let grads = net.backward(&cache, &target, &MeanSquared).unwrap();
        assert!(grads.values().all(|g| g == 0.0));
    }

    #[test]
    fn dropped_neuron_blocks_its_gradients() {
        let spec = NetworkSpec::dense(3, &[4], 1, "tanh", "identity", 0.5);
        let net = init_network(&spec, 2).unwrap();
        let x = array![[0.3, -0.7, 0.2]];
        let mut cache = net.forward(&x, Mode::Infer).unwrap();
        cache.masks[0] = Some(array![[0.0, 2.0, 2.0, 2.0]]);
        let grads = net.backward(&cache, &array![[1.0]], &MeanSquared).unwrap();
        assert!(grads.weights[0].row(0).iter().all(|&g| g == 0.0));
        assert_eq!(grads.biases[0][0], 0.0);
        assert_eq!(grads.weights[1][[0, 0]], 0.0);
        assert!(grads.weights[1][[0, 1]] != 0.0);
    }

    #[test]
    fn inverted_dropout_preserves_expectation() {
        let mut rng = seeded(5);
        let samples = 10_000;
        let mut total = 0.0;
        for _ in 0..samples {
            total += dropout_mask((1, 1), 0.5, &mut rng)[[0, 0]];
        }
        let mean = total / samples as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn infer_mode_applies_no_mask() {
        let spec = NetworkSpec::dense(3, &[5], 1, "relu", "identity", 0.5);
        let net = init_network(&spec, 2).unwrap();
        let cache = net.forward(&array![[1.0, 2.0, 3.0]], Mode::Infer).unwrap();
        assert!(cache.masks.iter().all(Option::is_none));
        let mut rng = seeded(0);
        let cache = net.forward(&array![[1.0, 2.0, 3.0]], Mode::Train(&mut rng)).unwrap();
        assert!(cache.masks[0].is_some());
        assert!(cache.masks[1].is_none());
    }
}
