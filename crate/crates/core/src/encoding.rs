//! Slot one-hot encoding of braid words plus the twelve normalized knot
//! features, giving the 240-dimensional network input.
//!
//! Layout: 19 slots of 12 entries each (slot-major), then the 12
//! features in [`FeatureVector::NAMES`] order. Letter `σ_k^ε` sets entry
//! `k + 3(1 - ε)` of its slot, so positive letters use entries 1..=6 and
//! inverses 7..=12.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{BraidLetter, BraidWord, Sign, MAX_ENCODABLE_LENGTH, MAX_GENERATOR};

pub const SLOT_COUNT: usize = MAX_ENCODABLE_LENGTH;
pub const LETTER_COUNT: usize = 2 * MAX_GENERATOR as usize;
pub const SLOT_DIM: usize = SLOT_COUNT * LETTER_COUNT;
pub const FEATURE_COUNT: usize = 12;
pub const INPUT_DIM: usize = SLOT_DIM + FEATURE_COUNT;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("word has {0} letters; at most {SLOT_COUNT} fit")]
    WordTooLong(usize),
    #[error("generator σ_{0} is beyond σ_{MAX_GENERATOR}")]
    GeneratorOutOfRange(u8),
    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),
    #[error("cannot fit normalization on an empty dataset")]
    EmptyDataset,
}

/// Which end of the slot block holds the letters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotPadding {
    /// Letters fill slots `1..=len`; empty slots follow.
    #[default]
    Trailing,
    /// Empty slots come first; letters end at slot 19.
    Leading,
}

/// 1-based basis index of a letter within its slot.
pub fn one_hot_index(letter: BraidLetter) -> usize {
    let k = letter.generator() as i32;
    let epsilon = letter.sign().as_i32();
    (k + 3 * (1 - epsilon)) as usize
}

pub fn encode_word(word: &BraidWord) -> Result<Vec<f64>, EncodingError> {
    encode_word_with(word, SlotPadding::Trailing)
}

pub fn encode_word_with(word: &BraidWord, padding: SlotPadding) -> Result<Vec<f64>, EncodingError> {
    let len = word.len();
    if len > SLOT_COUNT {
        return Err(EncodingError::WordTooLong(len));
    }
    let offset = match padding {
        SlotPadding::Trailing => 0,
        SlotPadding::Leading => SLOT_COUNT - len,
    };
    let mut values = vec![0.0; SLOT_DIM];
    for (i, &letter) in word.letters().iter().enumerate() {
        if letter.generator() > MAX_GENERATOR {
            return Err(EncodingError::GeneratorOutOfRange(letter.generator()));
        }
        let slot = offset + i;
        values[slot * LETTER_COUNT + one_hot_index(letter) - 1] = 1.0;
    }
    Ok(values)
}

pub fn decode_word(values: &[f64]) -> Result<BraidWord, EncodingError> {
    decode_word_with(values, SlotPadding::Trailing)
}

pub fn decode_word_with(values: &[f64], padding: SlotPadding) -> Result<BraidWord, EncodingError> {
    if values.len() != SLOT_DIM {
        return Err(EncodingError::MalformedEncoding(format!(
            "expected {SLOT_DIM} values, found {}",
            values.len()
        )));
    }
    let mut slots = Vec::with_capacity(SLOT_COUNT);
    for (slot, block) in values.chunks(LETTER_COUNT).enumerate() {
        let mut hot = None;
        for (j, &v) in block.iter().enumerate() {
            if v == 1.0 && hot.is_none() {
                hot = Some(j + 1);
            } else if v != 0.0 {
                return Err(EncodingError::MalformedEncoding(format!(
                    "slot {} is not a basis vector",
                    slot + 1
                )));
            }
        }
        slots.push(hot);
    }
    let occupied: Vec<usize> = match padding {
        SlotPadding::Trailing => {
            let len = slots.iter().take_while(|s| s.is_some()).count();
            if slots[len..].iter().any(Option::is_some) {
                return Err(EncodingError::MalformedEncoding(
                    "empty slot precedes an occupied slot".into(),
                ));
            }
            slots[..len].iter().map(|s| s.unwrap()).collect()
        }
        SlotPadding::Leading => {
            let gap = slots.iter().take_while(|s| s.is_none()).count();
            if slots[gap..].iter().any(Option::is_none) {
                return Err(EncodingError::MalformedEncoding(
                    "empty slot follows an occupied slot".into(),
                ));
            }
            slots[gap..].iter().map(|s| s.unwrap()).collect()
        }
    };
    let letters = occupied
        .into_iter()
        .map(|index| {
            let half = MAX_GENERATOR as usize;
            let (generator, sign) = if index <= half {
                (index, Sign::Positive)
            } else {
                (index - half, Sign::Negative)
            };
            BraidLetter::new(generator as u8, sign).expect("index in 1..=12")
        })
        .collect();
    Ok(BraidWord::from_letters(letters))
}

/// The twelve auxiliary knot invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub alternating: bool,
    pub fibered: bool,
    pub positive_braid_closure: bool,
    pub large: bool,
    pub small: bool,
    pub crossing_number: i64,
    pub seifert_genus: i64,
    pub braid_index: i64,
    pub signature: i64,
    pub arc_index: i64,
    pub determinant: i64,
    pub rasmussen_s: i64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; FEATURE_COUNT] = [
        "alternating",
        "fibered",
        "positive_braid_closure",
        "large",
        "small",
        "crossing_number",
        "seifert_genus",
        "braid_index",
        "signature",
        "arc_index",
        "determinant",
        "rasmussen_s",
    ];

    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        [
            b(self.alternating),
            b(self.fibered),
            b(self.positive_braid_closure),
            b(self.large),
            b(self.small),
            self.crossing_number as f64,
            self.seifert_genus as f64,
            self.braid_index as f64,
            self.signature as f64,
            self.arc_index as f64,
            self.determinant as f64,
            self.rasmussen_s as f64,
        ]
    }
}

/// Per-feature population mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: [f64; FEATURE_COUNT],
    pub std: [f64; FEATURE_COUNT],
}

impl NormalizationStats {
    /// Leaves features unchanged.
    pub fn identity() -> Self {
        Self {
            mean: [0.0; FEATURE_COUNT],
            std: [1.0; FEATURE_COUNT],
        }
    }

    pub fn invert(&self, normalized: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
        std::array::from_fn(|i| normalized[i] * self.std[i] + self.mean[i])
    }
}

/// Population statistics; a constant feature gets standard deviation 1.
pub fn fit_normalization(features: &[FeatureVector]) -> Result<NormalizationStats, EncodingError> {
    if features.is_empty() {
        return Err(EncodingError::EmptyDataset);
    }
    let rows: Vec<[f64; FEATURE_COUNT]> = features.iter().map(FeatureVector::to_array).collect();
    let n = rows.len() as f64;
    let mean: [f64; FEATURE_COUNT] =
        std::array::from_fn(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n);
    let std = std::array::from_fn(|i| {
        let var = rows.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd > 0.0 {
            sd
        } else {
            1.0
        }
    });
    Ok(NormalizationStats { mean, std })
}

pub fn apply_normalization(f: &FeatureVector, stats: &NormalizationStats) -> [f64; FEATURE_COUNT] {
    let raw = f.to_array();
    std::array::from_fn(|i| (raw[i] - stats.mean[i]) / stats.std[i])
}

/// The full network input for one braid representative.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedVector(Vec<f64>);

impl EncodedVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn slots(&self) -> &[f64] {
        &self.0[..SLOT_DIM]
    }

    pub fn features(&self) -> &[f64] {
        &self.0[SLOT_DIM..]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn encode_record(
    word: &BraidWord,
    f: &FeatureVector,
    stats: &NormalizationStats,
) -> Result<EncodedVector, EncodingError> {
    encode_record_with(word, f, stats, SlotPadding::Trailing)
}

pub fn encode_record_with(
    word: &BraidWord,
    f: &FeatureVector,
    stats: &NormalizationStats,
    padding: SlotPadding,
) -> Result<EncodedVector, EncodingError> {
    let mut values = encode_word_with(word, padding)?;
    values.extend_from_slice(&apply_normalization(f, stats));
    debug_assert_eq!(values.len(), INPUT_DIM);
    Ok(EncodedVector(values))
}
