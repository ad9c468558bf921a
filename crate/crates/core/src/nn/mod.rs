//! Fully connected feed-forward networks in `f64`.
//!
//! Activations and losses are looked up by name in registries, which is how
//! a network spec stored on disk refers to them.

mod activation;
mod adam;
mod gradcheck;
mod loss;
mod network;
mod train;

use thiserror::Error;

pub use activation::{activations, sigmoid, Activation, ActivationRegistry};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{gradient_check, relative_error, GradCheckReport, RELATIVE_ERROR_FLOOR};
pub use loss::{loss_by_name, losses, CrossEntropy, Loss, LossRegistry, MeanSquared, PROBABILITY_CLAMP};
pub use network::{
    dropout_mask, init_network, init_std, ForwardCache, Gradients, Mode, Network, NetworkParams,
    NetworkSpec,
};
pub use train::{count_correct, train, EpochStats, TrainConfig, Trainer};

pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("unknown activation {0:?}")]
    UnknownActivation(String),
    #[error("unknown loss {0:?}")]
    UnknownLoss(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("parameters contain non-finite values")]
    NonFinite,
    #[error("empty dataset")]
    EmptyDataset,
}

pub fn classify(probability: f64, cutoff: f64) -> bool {
    probability >= cutoff
}

/// Nearest integer, with halves rounded toward +∞.
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}
