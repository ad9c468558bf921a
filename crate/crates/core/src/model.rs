//! The persisted model: a single compact JSON document.

use std::fs;
use std::io;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::AugmentedDataset;
use crate::encoding::{NormalizationStats, SlotPadding};
use crate::nn::{Network, NetworkParams, NetworkSpec, NnError, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("refusing to save non-finite weights")]
    NonFinite,
    #[error("model parameters do not match the spec: {0}")]
    Shape(String),
    #[error(transparent)]
    Network(#[from] NnError),
}

/// Which rows the feature statistics were fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    #[default]
    Train,
    All,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingOptions {
    pub padding: SlotPadding,
}

/// Weights as `[layer][row][column]`, biases as `[layer][row]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedParams {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&NetworkParams> for SerializedParams {
    fn from(params: &NetworkParams) -> Self {
        Self {
            weights: params
                .weights
                .iter()
                .map(|w| w.rows().into_iter().map(|r| r.to_vec()).collect())
                .collect(),
            biases: params.biases.iter().map(|b| b.to_vec()).collect(),
        }
    }
}

impl TryFrom<&SerializedParams> for NetworkParams {
    type Error = ModelError;

    fn try_from(s: &SerializedParams) -> Result<Self, ModelError> {
        let weights = s
            .weights
            .iter()
            .enumerate()
            .map(|(j, rows)| {
                let cols = rows.first().map_or(0, Vec::len);
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                if rows.iter().any(|r| r.len() != cols) {
                    return Err(ModelError::Shape(format!("ragged weight matrix {}", j + 1)));
                }
                Array2::from_shape_vec((rows.len(), cols), flat)
                    .map_err(|e| ModelError::Shape(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let biases = s.biases.iter().map(|b| Array1::from(b.clone())).collect();
        Ok(NetworkParams { weights, biases })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub target: String,
    pub spec: NetworkSpec,
    pub params: SerializedParams,
    pub normalization: NormalizationStats,
    pub normalization_scope: NormalizationScope,
    pub encoding: EncodingOptions,
    pub train_config: TrainConfig,
    /// SHA-256 over the training rows, hex encoded.
    pub training_fingerprint: String,
}

impl ModelFile {
    pub fn new(
        target: &str,
        network: &Network,
        normalization: NormalizationStats,
        normalization_scope: NormalizationScope,
        encoding: EncodingOptions,
        train_config: TrainConfig,
        training_fingerprint: String,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            target: target.to_string(),
            spec: network.spec().clone(),
            params: network.params().into(),
            normalization,
            normalization_scope,
            encoding,
            train_config,
            training_fingerprint,
        }
    }

    pub fn network(&self) -> Result<Network, ModelError> {
        let params = NetworkParams::try_from(&self.params)?;
        Ok(Network::new(self.spec.clone(), params)?)
    }

    fn is_finite(&self) -> bool {
        let stats = &self.normalization;
        self.params.weights.iter().flatten().flatten().all(|v| v.is_finite())
            && self.params.biases.iter().flatten().all(|v| v.is_finite())
            && stats.mean.iter().chain(&stats.std).all(|v| v.is_finite())
    }

    /// Canonical text: compact JSON and a trailing newline.
    pub fn to_json(&self) -> Result<String, ModelError> {
        if !self.is_finite() {
            return Err(ModelError::NonFinite);
        }
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let version: VersionProbe = serde_json::from_str(text)?;
        if version.format_version != FORMAT_VERSION {
            return Err(ModelError::UnsupportedVersion(version.format_version));
        }
        let model: ModelFile = serde_json::from_str(text)?;
        model.network()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Hash of the names, representative indices and words of `rows`.
pub fn training_fingerprint(data: &AugmentedDataset, rows: &[usize]) -> String {
    let mut hasher = Sha256::new();
    for &i in rows {
        let row = &data.rows[i];
        hasher.update(format!("{}\t{}\t{}\n", row.name, row.rep, row.word).as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_network;
    use ndarray::array;

    fn model() -> (Network, ModelFile) {
        let spec = NetworkSpec::dense(3, &[4], 1, "relu", "sigmoid", 0.5);
        let network = init_network(&spec, 8).unwrap();
        let file = ModelFile::new(
            "qp",
            &network,
            NormalizationStats::identity(),
            NormalizationScope::Train,
            EncodingOptions::default(),
            TrainConfig::default(),
            "00".into(),
        );
        (network, file)
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let (network, file) = model();
        let first = file.to_json().unwrap();
        let loaded = ModelFile::from_json(&first).unwrap();
        assert_eq!(loaded.to_json().unwrap(), first);
        let x = array![[0.1, -3.0, 2.5]];
        assert_eq!(
            loaded.network().unwrap().predict(&x).unwrap(),
            network.predict(&x).unwrap()
        );
    }

    #[test]
    fn rejects_bad_files() {
        let (_, mut file) = model();
        let text = file.to_json().unwrap().replace("\"format_version\":1", "\"format_version\":9");
        assert!(matches!(ModelFile::from_json(&text), Err(ModelError::UnsupportedVersion(9))));
        file.params.biases[0][0] = f64::NAN;
        assert!(matches!(file.to_json(), Err(ModelError::NonFinite)));
        file.params.biases[0].pop();
        assert!(file.network().is_err());
    }
}
