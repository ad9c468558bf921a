use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::loss::loss_by_name;
use super::network::{init_network, Mode, NetworkSpec};
use super::NnError;
use crate::rng::{derive_seed, seeded, SeededRng};

/// Denominator floor of the relative error, so that parameters with a
/// vanishing gradient are compared absolutely.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

pub const GRADCHECK_BATCH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub probes: usize,
    /// Flat parameter index attaining the maximum.
    pub worst_index: usize,
}

fn gaussian(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Compares backpropagated gradients with central differences of step `h`
/// at `probe_count` random parameters (all of them when `probe_count` is at
/// least the parameter count). Inputs and targets are drawn from the seed;
/// targets are probability vectors when the output head produces them.
/// Biases are drawn at random too, since zero biases put ReLU units
/// downstream of a dead layer exactly on the kink.
pub fn gradient_check(
    spec: &NetworkSpec,
    loss: &str,
    seed: u64,
    probe_count: usize,
    h: f64,
) -> Result<GradCheckReport, NnError> {
    let loss = loss_by_name(loss)?;
    let mut network = init_network(spec, derive_seed(seed, "init"))?;
    let mut rng = seeded(derive_seed(seed, "data"));
    for b in network.params_mut().biases.iter_mut() {
        b.mapv_inplace(|_| 0.1 * gaussian(&mut rng));
    }
    let inputs = Array2::from_shape_simple_fn((GRADCHECK_BATCH, spec.input_dim()), || {
        gaussian(&mut rng)
    });
    let width = spec.output_dim();
    let targets = match spec.output_activation() {
        "sigmoid" => Array2::from_shape_simple_fn((GRADCHECK_BATCH, width), || {
            f64::from(u8::from(rng.random_bool(0.5)))
        }),
        "softmax" => {
            let mut t = Array2::zeros((GRADCHECK_BATCH, width));
            for mut row in t.rows_mut() {
                row[rng.random_range(0..width)] = 1.0;
            }
            t
        }
        _ => Array2::from_shape_simple_fn((GRADCHECK_BATCH, width), || gaussian(&mut rng)),
    };

    let cache = network.forward(&inputs, Mode::Infer)?;
    let grads = network.backward(&cache, &targets, loss.as_ref())?;
    let total = network.params().len();
    let indices: Vec<usize> = if probe_count >= total {
        (0..total).collect()
    } else {
        rand::seq::index::sample(&mut rng, total, probe_count).into_vec()
    };

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        probes: indices.len(),
        worst_index: 0,
    };
    for index in indices {
        let original = network.params().get_flat(index).expect("index in range");
        network.params_mut().set_flat(index, original + h);
        let plus = network.loss(&inputs, &targets, loss.as_ref())?;
        network.params_mut().set_flat(index, original - h);
        let minus = network.loss(&inputs, &targets, loss.as_ref())?;
        network.params_mut().set_flat(index, original);
        let numeric = (plus - minus) / (2.0 * h);
        let analytic = grads.get_flat(index).expect("index in range");
        let error = relative_error(analytic, numeric);
        if error > report.max_relative_error {
            report.max_relative_error = error;
            report.worst_index = index;
        }
    }
    Ok(report)
}
