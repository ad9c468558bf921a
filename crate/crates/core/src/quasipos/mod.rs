//! Positive band decompositions.
//!
//! A band-center certificate names, for a braid word, the positions of
//! the central positive letter of each band. The conjugator of the band
//! centered at position `p` is the free reduction of the product of all
//! non-center letters before `p`, so the band product telescopes back to
//! the word exactly when the non-center letters multiply to the identity.

mod fixture;
mod search;

pub use fixture::{
    parse_fixture, CertificateRow, FixtureError, Orientation, QUASINEGATIVE_FIXTURE,
    QUASIPOSITIVE_FIXTURE,
};
pub use search::{search_certificate, search_certificate_with, SearchOptions};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{
    free_reduce, is_knot_closure, mirror, words_equal_with_budget, BraidError, BraidLetter,
    BraidWord, DEFAULT_HANDLE_BUDGET,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuasiposError {
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("band center at position {position} is a negative letter")]
    NonPositiveCenter { position: usize },
    #[error(transparent)]
    Braid(#[from] BraidError),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenusError {
    #[error("band count minus strands plus one is odd")]
    ParityError,
    #[error("band count minus strands plus one is negative")]
    NegativeGenus,
}

/// `α · σ_j · α^{-1}` with `σ_j` positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Band {
    conjugator: BraidWord,
    core: BraidLetter,
}

impl Band {
    pub fn new(conjugator: BraidWord, core: BraidLetter) -> Result<Self, QuasiposError> {
        if !core.is_positive() {
            return Err(QuasiposError::InvalidCertificate(format!(
                "band core {core} is not positive"
            )));
        }
        Ok(Self { conjugator, core })
    }

    pub fn conjugator(&self) -> &BraidWord {
        &self.conjugator
    }

    pub fn core(&self) -> BraidLetter {
        self.core
    }

    pub fn to_word(&self) -> BraidWord {
        let core = BraidWord::from_letters(vec![self.core]);
        self.conjugator
            .concat(&core)
            .concat(&self.conjugator.inverse())
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_word())
    }
}

/// A braid word plus the strictly increasing 1-based positions of its
/// band centers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BandCertificate {
    word: BraidWord,
    centers: Vec<usize>,
}

impl BandCertificate {
    pub fn new(word: BraidWord, centers: Vec<usize>) -> Result<Self, QuasiposError> {
        if centers.is_empty() && !word.is_empty() {
            return Err(QuasiposError::InvalidCertificate(
                "no band centers for a nonempty word".into(),
            ));
        }
        if centers.windows(2).any(|p| p[0] >= p[1]) {
            return Err(QuasiposError::InvalidCertificate(
                "centers must be strictly increasing".into(),
            ));
        }
        if let Some(&bad) = centers.iter().find(|&&c| c == 0 || c > word.len()) {
            return Err(QuasiposError::InvalidCertificate(format!(
                "center {bad} is outside 1..={}",
                word.len()
            )));
        }
        Ok(Self { word, centers })
    }

    pub fn word(&self) -> &BraidWord {
        &self.word
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// The certificate for the mirror word with the same centers.
    pub fn mirrored(&self) -> Self {
        Self {
            word: mirror(&self.word),
            centers: self.centers.clone(),
        }
    }

    /// Centers as a comma-separated list, the fixture format.
    pub fn centers_text(&self) -> String {
        self.centers
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Non-center letters in order; the certificate is sound iff this
    /// product is trivial.
    pub fn residual(&self) -> BraidWord {
        let mut centers = self.centers.iter().peekable();
        let letters = self
            .word
            .letters()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                if centers.peek() == Some(&&(i + 1)) {
                    centers.next();
                    false
                } else {
                    true
                }
            })
            .map(|(_, &l)| l)
            .collect();
        BraidWord::new(letters, self.word.strands()).expect("letters come from the word")
    }
}

pub fn bands_from_certificate(cert: &BandCertificate) -> Result<Vec<Band>, QuasiposError> {
    let letters = cert.word.letters();
    let strands = cert.word.strands();
    let mut bands = Vec::with_capacity(cert.centers.len());
    let mut conjugator = Vec::new();
    let mut next_center = cert.centers.iter().peekable();
    for (index, &letter) in letters.iter().enumerate() {
        if next_center.peek() == Some(&&(index + 1)) {
            next_center.next();
            if !letter.is_positive() {
                return Err(QuasiposError::NonPositiveCenter { position: index + 1 });
            }
            let alpha = free_reduce(&BraidWord::new(conjugator.clone(), strands)?);
            bands.push(Band { conjugator: alpha, core: letter });
        } else {
            conjugator.push(letter);
        }
    }
    Ok(bands)
}

pub fn band_product(bands: &[Band], strands: u8) -> BraidWord {
    bands
        .iter()
        .fold(BraidWord::empty(strands).expect("strands ≥ 2"), |acc, b| {
            acc.concat(&b.to_word())
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EqualityMethod {
    FreeReduction,
    HandleReduction,
}

impl fmt::Display for EqualityMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EqualityMethod::FreeReduction => "free-reduction",
            EqualityMethod::HandleReduction => "handle-reduction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    NonPositiveCenter { position: usize },
    ProductMismatch,
    NotAKnot,
    Genus(GenusError),
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NonPositiveCenter { position } => {
                write!(f, "center {position} is not a positive letter")
            }
            Rejection::ProductMismatch => f.write_str("band product differs from the word"),
            Rejection::NotAKnot => f.write_str("closure is not a knot"),
            Rejection::Genus(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyResult {
    pub valid: bool,
    /// Number of bands `m`.
    pub band_count: usize,
    pub strands: u8,
    /// `(m - n + 1) / 2`, present iff valid.
    pub genus: Option<i64>,
    pub equality_method: Option<EqualityMethod>,
    pub rejection: Option<Rejection>,
}

impl VerifyResult {
    fn rejected(cert: &BandCertificate, rejection: Rejection) -> Self {
        Self {
            valid: false,
            band_count: cert.centers.len(),
            strands: cert.word.strands(),
            genus: None,
            equality_method: None,
            rejection: Some(rejection),
        }
    }
}

/// Slice genus of the closure of a quasipositive braid with `band_count`
/// bands on `strands` strands.
pub fn rudolph_genus(band_count: i64, strands: i64) -> Result<i64, GenusError> {
    let numerator = band_count - strands + 1;
    if numerator < 0 {
        Err(GenusError::NegativeGenus)
    } else if numerator % 2 != 0 {
        Err(GenusError::ParityError)
    } else {
        Ok(numerator / 2)
    }
}

pub fn verify_certificate(cert: &BandCertificate) -> Result<VerifyResult, QuasiposError> {
    verify_certificate_with_budget(cert, DEFAULT_HANDLE_BUDGET)
}

/// Checks that every center is positive, that the band product equals the
/// word in `B_n` and that the closure is a knot. `Err` only when the
/// handle-reduction budget runs out, in which case validity is unknown.
pub fn verify_certificate_with_budget(
    cert: &BandCertificate,
    budget: usize,
) -> Result<VerifyResult, QuasiposError> {
    let bands = match bands_from_certificate(cert) {
        Ok(bands) => bands,
        Err(QuasiposError::NonPositiveCenter { position }) => {
            return Ok(VerifyResult::rejected(
                cert,
                Rejection::NonPositiveCenter { position },
            ))
        }
        Err(e) => return Err(e),
    };
    let product = band_product(&bands, cert.word.strands());
    let method = if free_reduce(&product) == free_reduce(&cert.word) {
        debug_assert!(
            words_equal_with_budget(&product, &cert.word, budget).unwrap_or(true),
            "free reduction and handle reduction disagree on {}",
            cert.word
        );
        EqualityMethod::FreeReduction
    } else if words_equal_with_budget(&product, &cert.word, budget)? {
        EqualityMethod::HandleReduction
    } else {
        return Ok(VerifyResult::rejected(cert, Rejection::ProductMismatch));
    };
    if !is_knot_closure(&cert.word) {
        return Ok(VerifyResult::rejected(cert, Rejection::NotAKnot));
    }
    let genus = match rudolph_genus(bands.len() as i64, cert.word.strands() as i64) {
        Ok(g) => g,
        Err(e) => return Ok(VerifyResult::rejected(cert, Rejection::Genus(e))),
    };
    Ok(VerifyResult {
        valid: true,
        band_count: bands.len(),
        strands: cert.word.strands(),
        genus: Some(genus),
        equality_method: Some(method),
        rejection: None,
    })
}

/// Verifies the mirror of a quasinegative certificate. The reported genus
/// is that of the mirror knot; the original has `τ = -genus`.
pub fn verify_quasinegative(cert: &BandCertificate) -> Result<VerifyResult, QuasiposError> {
    verify_certificate(&cert.mirrored())
}
