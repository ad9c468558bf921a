//! Tab-separated certificate tables.
//!
//! One row per certificate: knot name, braid word, comma-separated
//! 1-based center positions, the expected τ value, and an optional
//! `positive`/`negative` orientation column. Quasipositive rows list
//! `τ = g4`; quasinegative rows list `τ = -g4` and are verified through
//! the mirror. Lines starting with `#` are comments.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::BandCertificate;
use crate::braid::parse_braid;

/// Knots with quasipositive braid representatives.
pub const QUASIPOSITIVE_FIXTURE: &str = include_str!("../../fixtures/quasipositive.tsv");
/// Knots with quasinegative braid representatives.
pub const QUASINEGATIVE_FIXTURE: &str = include_str!("../../fixtures/quasinegative.tsv");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FixtureError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Positive,
    Negative,
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" | "+" => Ok(Orientation::Positive),
            "negative" | "-" => Ok(Orientation::Negative),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Positive => "positive",
            Orientation::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateRow {
    /// 1-based line number in the source text.
    pub line: usize,
    pub name: String,
    pub certificate: BandCertificate,
    pub expected_tau: i64,
    pub orientation: Orientation,
}

impl CertificateRow {
    /// The slice genus implied by the expected τ column.
    pub fn expected_genus(&self) -> i64 {
        match self.orientation {
            Orientation::Positive => self.expected_tau,
            Orientation::Negative => -self.expected_tau,
        }
    }

    /// Renders the row in the fixture format.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.name,
            self.certificate.word(),
            self.certificate.centers_text(),
            self.expected_tau,
            self.orientation
        )
    }
}

/// Parses every data line independently so one malformed row does not
/// hide the others.
pub fn parse_fixture(text: &str) -> Vec<Result<CertificateRow, FixtureError>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_row(i + 1, l))
        .collect()
}

fn parse_row(line: usize, text: &str) -> Result<CertificateRow, FixtureError> {
    let err = |message: String| FixtureError { line, message };
    let fields: Vec<&str> = text.split('\t').map(str::trim).collect();
    if !(4..=5).contains(&fields.len()) {
        return Err(err(format!("expected 4 or 5 fields, found {}", fields.len())));
    }
    let word = parse_braid(fields[1]).map_err(|e| err(e.to_string()))?;
    let centers = fields[2]
        .split(',')
        .map(|c| c.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| err(format!("bad center list {:?}: {e}", fields[2])))?;
    let expected_tau = fields[3]
        .parse::<i64>()
        .map_err(|e| err(format!("bad expected value {:?}: {e}", fields[3])))?;
    let certificate = BandCertificate::new(word, centers).map_err(|e| err(e.to_string()))?;
    let orientation = match fields.get(4) {
        Some(o) => o.parse().map_err(err)?,
        None => {
            // infer from the first center letter
            let first = certificate.centers().first().copied().unwrap_or(1);
            match certificate.word().letters().get(first - 1) {
                Some(l) if !l.is_positive() => Orientation::Negative,
                _ => Orientation::Positive,
            }
        }
    };
    Ok(CertificateRow {
        line,
        name: fields[0].to_string(),
        certificate,
        expected_tau,
        orientation,
    })
}
