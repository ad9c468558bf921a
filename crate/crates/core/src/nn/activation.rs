use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, LazyLock};

use ndarray::{Array2, Axis, Zip};

/// A layer nonlinearity acting on a batch of pre-activations, one sample
/// per row.
pub trait Activation: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn apply(&self, z: &Array2<f64>) -> Array2<f64>;

    /// Chain rule through the activation: given `z`, `a = apply(z)` and the
    /// upstream gradient `dL/da`, returns `dL/dz`.
    fn backward(&self, z: &Array2<f64>, a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64>;

    /// True when the activation couples components and may only sit on the
    /// output layer.
    fn output_only(&self) -> bool {
        false
    }
}

#[derive(Debug)]
pub struct Relu;

impl Activation for Relu {
    fn name(&self) -> &'static str {
        "relu"
    }

    fn apply(&self, z: &Array2<f64>) -> Array2<f64> {
        z.mapv(|x| x.max(0.0))
    }

    fn backward(&self, z: &Array2<f64>, _a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64> {
        Zip::from(z)
            .and(upstream)
            .map_collect(|&z, &g| if z > 0.0 { g } else { 0.0 })
    }
}

#[derive(Debug)]
pub struct Tanh;

impl Activation for Tanh {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn apply(&self, z: &Array2<f64>) -> Array2<f64> {
        z.mapv(f64::tanh)
    }

    fn backward(&self, _z: &Array2<f64>, a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64> {
        Zip::from(a)
            .and(upstream)
            .map_collect(|&a, &g| g * (1.0 - a * a))
    }
}

#[derive(Debug)]
pub struct Sigmoid;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation for Sigmoid {
    fn name(&self) -> &'static str {
        "sigmoid"
    }

    fn apply(&self, z: &Array2<f64>) -> Array2<f64> {
        z.mapv(sigmoid)
    }

    fn backward(&self, _z: &Array2<f64>, a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64> {
        Zip::from(a)
            .and(upstream)
            .map_collect(|&a, &g| g * a * (1.0 - a))
    }
}

#[derive(Debug)]
pub struct Identity;

impl Activation for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }

    fn apply(&self, z: &Array2<f64>) -> Array2<f64> {
        z.clone()
    }

    fn backward(&self, _z: &Array2<f64>, _a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64> {
        upstream.clone()
    }
}

/// Row-wise softmax.
#[derive(Debug)]
pub struct Softmax;

impl Activation for Softmax {
    fn name(&self) -> &'static str {
        "softmax"
    }

    fn apply(&self, z: &Array2<f64>) -> Array2<f64> {
        let mut out = z.clone();
        for mut row in out.axis_iter_mut(Axis(0)) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.mapv_inplace(|x| (x - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|x| x / sum);
        }
        out
    }

    fn backward(&self, _z: &Array2<f64>, a: &Array2<f64>, upstream: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(a.raw_dim());
        for ((a, g), mut o) in a
            .axis_iter(Axis(0))
            .zip(upstream.axis_iter(Axis(0)))
            .zip(out.axis_iter_mut(Axis(0)))
        {
            let dot = a.dot(&g);
            Zip::from(&mut o)
                .and(&a)
                .and(&g)
                .for_each(|o, &a, &g| *o = a * (g - dot));
        }
        out
    }

    fn output_only(&self) -> bool {
        true
    }
}

/// Activations addressable by name, as stored in model files.
#[derive(Clone, Default)]
pub struct ActivationRegistry {
    entries: BTreeMap<String, Arc<dyn Activation>>,
}

impl ActivationRegistry {
    pub fn with_defaults() -> Self {
        let mut registry = Self::default();
        registry.register(Arc::new(Relu));
        registry.register(Arc::new(Tanh));
        registry.register(Arc::new(Sigmoid));
        registry.register(Arc::new(Identity));
        registry.register(Arc::new(Softmax));
        registry
    }

    pub fn register(&mut self, activation: Arc<dyn Activation>) {
        self.entries.insert(activation.name().to_string(), activation);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Activation>> {
        self.entries.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

static ACTIVATIONS: LazyLock<ActivationRegistry> = LazyLock::new(ActivationRegistry::with_defaults);

/// The built-in activations.
pub fn activations() -> &'static ActivationRegistry {
    &ACTIVATIONS
}
