//! Knot records, augmentation by random braid moves, and knot-disjoint
//! train/test splits.
//!
//! Input CSV columns, in order: `name`, `braid`, the twelve feature
//! columns of [`FeatureVector::NAMES`], then the labels `qp`, `g4`, `tau`.
//! Label cells may be blank; feature cells may not. Booleans accept
//! `1/0`, `true/false`, `y/n` and `yes/no` in any case.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::braid::{parse_braid, random_equivalent, BraidWord, MoveBounds};
use crate::encoding::{
    encode_record_with, fit_normalization, EncodedVector, EncodingError, FeatureVector,
    NormalizationStats, SlotPadding, INPUT_DIM,
};
use crate::nn::{round_half_up, Network, NnError};
use crate::quasipos::{parse_fixture, Orientation, QUASINEGATIVE_FIXTURE, QUASIPOSITIVE_FIXTURE};
use crate::rng::{derive_seed, seeded};

pub const DEFAULT_REPS: usize = 32;
pub const DEFAULT_TEST_KNOTS: usize = 50;
pub const DISTINCTNESS_RETRIES: usize = 10;
const PREDICT_CHUNK: usize = 1024;

pub const LABEL_COLUMNS: [&str; 3] = ["qp", "g4", "tau"];

pub fn csv_header() -> Vec<&'static str> {
    let mut header = vec!["name", "braid"];
    header.extend(FeatureVector::NAMES);
    header.extend(LABEL_COLUMNS);
    header
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    SchemaMismatch { expected: String, found: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate knot {0}")]
    DuplicateKnot(String),
    #[error("requested {requested} test knots but only {available} are labelled")]
    InsufficientLabeledKnots { requested: usize, available: usize },
    #[error("unknown knot {0}")]
    UnknownKnot(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Network(#[from] NnError),
    #[error("cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Labels {
    pub quasipositive: Option<bool>,
    pub g4: Option<i64>,
    pub tau: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnotRecord {
    pub name: String,
    pub word: BraidWord,
    pub features: FeatureVector,
    pub labels: Labels,
}

impl KnotRecord {
    pub fn new(
        name: impl Into<String>,
        word: BraidWord,
        features: FeatureVector,
        labels: Labels,
    ) -> Result<Self, String> {
        if !word.is_encodable() {
            return Err(format!("braid {word} is not encodable"));
        }
        if let (Some(g4), Some(tau)) = (labels.g4, labels.tau) {
            if tau.abs() > g4 {
                return Err(format!("|tau| = {} exceeds g4 = {g4}", tau.abs()));
            }
        }
        Ok(Self {
            name: name.into(),
            word,
            features,
            labels,
        })
    }
}

/// A rejected input row. `line` is the 1-based line in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub records: Vec<KnotRecord>,
    pub rejected: Vec<RowError>,
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadReport, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => DatasetError::FileNotFound(path.display().to_string()),
        _ => DatasetError::Io(e),
    })?;
    read_csv(file)
}

pub fn read_csv(reader: impl Read) -> Result<LoadReport, DatasetError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let expected = csv_header();
    let found: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(DatasetError::SchemaMismatch {
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    let mut report = LoadReport::default();
    let mut names = HashSet::new();
    for result in csv.records() {
        let (line, parsed) = match result {
            Ok(row) => {
                let line = row.position().map_or(0, |p| p.line());
                (line, parse_record(&row))
            }
            Err(e) => (e.position().map_or(0, |p| p.line()), Err(e.to_string())),
        };
        match parsed {
            Ok(record) if !names.insert(record.name.clone()) => report.rejected.push(RowError {
                line,
                message: format!("duplicate knot {}", record.name),
            }),
            Ok(record) => report.records.push(record),
            Err(message) => report.rejected.push(RowError { line, message }),
        }
    }
    Ok(report)
}

fn parse_bool(column: &str, cell: &str) -> Result<bool, String> {
    match cell.to_ascii_lowercase().as_str() {
        "1" | "true" | "y" | "yes" => Ok(true),
        "0" | "false" | "n" | "no" => Ok(false),
        _ => Err(format!("{column}: expected a boolean, found {cell:?}")),
    }
}

fn parse_int(column: &str, cell: &str) -> Result<i64, String> {
    cell.parse()
        .map_err(|_| format!("{column}: expected an integer, found {cell:?}"))
}

fn optional<T>(cell: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse(cell).map(Some)
    }
}

fn parse_record(row: &csv::StringRecord) -> Result<KnotRecord, String> {
    let expected = csv_header().len();
    if row.len() != expected {
        return Err(format!("expected {expected} fields, found {}", row.len()));
    }
    let name = &row[0];
    if name.is_empty() {
        return Err("empty knot name".into());
    }
    let word = parse_braid(&row[1]).map_err(|e| format!("braid: {e}"))?;
    let names = FeatureVector::NAMES;
    let cell = |i: usize| -> Result<&str, String> {
        let value = &row[2 + i];
        if value.is_empty() {
            Err(format!("{}: missing value", names[i]))
        } else {
            Ok(value)
        }
    };
    let flag = |i: usize| cell(i).and_then(|v| parse_bool(names[i], v));
    let int = |i: usize| cell(i).and_then(|v| parse_int(names[i], v));
    let features = FeatureVector {
        alternating: flag(0)?,
        fibered: flag(1)?,
        positive_braid_closure: flag(2)?,
        large: flag(3)?,
        small: flag(4)?,
        crossing_number: int(5)?,
        seifert_genus: int(6)?,
        braid_index: int(7)?,
        signature: int(8)?,
        arc_index: int(9)?,
        determinant: int(10)?,
        rasmussen_s: int(11)?,
    };
    let labels = Labels {
        quasipositive: optional(&row[14], |v| parse_bool("qp", v))?,
        g4: optional(&row[15], |v| parse_int("g4", v))?,
        tau: optional(&row[16], |v| parse_int("tau", v))?,
    };
    KnotRecord::new(name, word, features, labels)
}

fn bool_cell(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn record_cells(word: &BraidWord, f: &FeatureVector, labels: &Labels) -> Vec<String> {
    let mut cells = vec![word.to_string()];
    cells.extend(
        [f.alternating, f.fibered, f.positive_braid_closure, f.large, f.small]
            .map(|b| bool_cell(b).to_string()),
    );
    cells.extend(
        [
            f.crossing_number,
            f.seifert_genus,
            f.braid_index,
            f.signature,
            f.arc_index,
            f.determinant,
            f.rasmussen_s,
        ]
        .map(|v| v.to_string()),
    );
    cells.push(opt_cell(labels.quasipositive.map(bool_cell)));
    cells.push(opt_cell(labels.g4));
    cells.push(opt_cell(labels.tau));
    cells
}

pub fn write_csv(records: &[KnotRecord], writer: impl Write) -> Result<(), DatasetError> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(csv_header())?;
    for r in records {
        let mut cells = vec![r.name.clone()];
        cells.extend(record_cells(&r.word, &r.features, &r.labels));
        csv.write_record(&cells)?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentConfig {
    pub reps: usize,
    /// Inclusive range of random moves per representative.
    pub min_moves: usize,
    pub max_moves: usize,
    pub bounds: MoveBounds,
    pub padding: SlotPadding,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            reps: DEFAULT_REPS,
            min_moves: 5,
            max_moves: 20,
            bounds: MoveBounds::default(),
            padding: SlotPadding::Trailing,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRow {
    pub name: String,
    /// 1-based; representative 1 is the input word.
    pub rep: usize,
    pub word: BraidWord,
    pub features: FeatureVector,
    pub labels: Labels,
    pub vector: EncodedVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDataset {
    pub rows: Vec<AugmentedRow>,
    pub stats: NormalizationStats,
    pub padding: SlotPadding,
    pub reps: usize,
    pub seed: u64,
}

/// Expands every record into `config.reps` braid representatives, ordered
/// by knot name. Features are normalized with statistics over all
/// records until [`AugmentedDataset::renormalize`] is called.
pub fn augment(records: &[KnotRecord], config: &AugmentConfig) -> Result<AugmentedDataset, DatasetError> {
    let mut sorted: Vec<&KnotRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(w) = sorted.windows(2).find(|w| w[0].name == w[1].name) {
        return Err(DatasetError::DuplicateKnot(w[0].name.clone()));
    }
    let mut raw = Vec::with_capacity(sorted.len() * config.reps);
    for record in sorted {
        for (rep, word) in representatives(record, config).into_iter().enumerate() {
            raw.push((record.name.clone(), rep + 1, word, record.features, record.labels));
        }
    }
    build_dataset(raw, config.padding, config.reps, config.seed)
}

fn representatives(record: &KnotRecord, config: &AugmentConfig) -> Vec<BraidWord> {
    let mut words = vec![record.word.clone()];
    let mut seen = HashSet::from([record.word.clone()]);
    let (lo, hi) = (config.min_moves, config.max_moves.max(config.min_moves));
    for rep in 2..=config.reps {
        let mut word = record.word.clone();
        for attempt in 0..=DISTINCTNESS_RETRIES {
            let seed = derive_seed(config.seed, &format!("{}/{rep}/{attempt}", record.name));
            let moves = seeded(seed).random_range(lo..=hi);
            word = random_equivalent(&record.word, moves, config.bounds, seed);
            if !seen.contains(&word) {
                break;
            }
            if attempt == DISTINCTNESS_RETRIES {
                log::warn!(
                    "{}: representative {rep} duplicates an earlier word after {DISTINCTNESS_RETRIES} retries",
                    record.name
                );
            }
        }
        seen.insert(word.clone());
        words.push(word);
    }
    words
}

type RawRow = (String, usize, BraidWord, FeatureVector, Labels);

fn build_dataset(
    raw: Vec<RawRow>,
    padding: SlotPadding,
    reps: usize,
    seed: u64,
) -> Result<AugmentedDataset, DatasetError> {
    let stats = if raw.is_empty() {
        NormalizationStats::identity()
    } else {
        fit_normalization(&raw.iter().map(|r| r.3).collect::<Vec<_>>())?
    };
    let rows = raw
        .into_iter()
        .map(|(name, rep, word, features, labels)| {
            let vector = encode_record_with(&word, &features, &stats, padding)?;
            Ok(AugmentedRow {
                name,
                rep,
                word,
                features,
                labels,
                vector,
            })
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    Ok(AugmentedDataset {
        rows,
        stats,
        padding,
        reps,
        seed,
    })
}

impl AugmentedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct knot names in row order.
    pub fn knot_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.name.as_str()).collect();
        names.dedup();
        names
    }

    pub fn rows_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = (usize, &'a AugmentedRow)> + 'a {
        self.rows.iter().enumerate().filter(move |(_, r)| r.name == name)
    }

    /// Population statistics over the given rows.
    pub fn fit_stats(&self, rows: &[usize]) -> Result<NormalizationStats, DatasetError> {
        let features: Vec<FeatureVector> = rows.iter().map(|&i| self.rows[i].features).collect();
        Ok(fit_normalization(&features)?)
    }

    /// Re-encodes every row's feature tail with `stats`.
    pub fn renormalize(&mut self, stats: NormalizationStats) -> Result<(), DatasetError> {
        for row in &mut self.rows {
            row.vector = encode_record_with(&row.word, &row.features, &stats, self.padding)?;
        }
        self.stats = stats;
        Ok(())
    }

    /// Stacks the encoded vectors of `rows` into a matrix.
    pub fn inputs(&self, rows: &[usize]) -> Array2<f64> {
        let mut out = Array2::zeros((rows.len(), INPUT_DIM));
        for (mut dst, &i) in out.rows_mut().into_iter().zip(rows) {
            dst.assign(&ndarray::ArrayView1::from(self.rows[i].vector.as_slice()));
        }
        out
    }
}

/// A knot-disjoint partition of row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub test_knots: BTreeSet<String>,
}

/// Samples `test_knot_count` knots uniformly among those whose labels pass
/// `labelled`; all their rows form the test set and every other labelled
/// row the training set.
pub fn split_by_knot(
    data: &AugmentedDataset,
    test_knot_count: usize,
    seed: u64,
    labelled: impl Fn(&Labels) -> bool,
) -> Result<Split, DatasetError> {
    let candidates: Vec<&str> = data
        .rows
        .iter()
        .filter(|r| labelled(&r.labels))
        .map(|r| r.name.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if test_knot_count > candidates.len() {
        return Err(DatasetError::InsufficientLabeledKnots {
            requested: test_knot_count,
            available: candidates.len(),
        });
    }
    let mut rng = seeded(seed);
    let test_knots: BTreeSet<String> = candidates
        .choose_multiple(&mut rng, test_knot_count)
        .map(|s| s.to_string())
        .collect();
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
        test_knots,
    };
    for (i, row) in data.rows.iter().enumerate() {
        if !labelled(&row.labels) {
            continue;
        }
        if split.test_knots.contains(&row.name) {
            split.test.push(i);
        } else {
            split.train.push(i);
        }
    }
    Ok(split)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// First output of `network` on each of `rows`, evaluated in chunks.
pub fn predict_rows(network: &Network, data: &AugmentedDataset, rows: &[usize]) -> Result<Vec<f64>, DatasetError> {
    let mut out = Vec::with_capacity(rows.len());
    for chunk in rows.chunks(PREDICT_CHUNK) {
        let prediction = network.predict(&data.inputs(chunk))?;
        out.extend(prediction.column(0).iter().copied());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotPrediction {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

pub fn mean_prediction(network: &Network, data: &AugmentedDataset, name: &str) -> Result<KnotPrediction, DatasetError> {
    let rows: Vec<usize> = data.rows_of(name).map(|(i, _)| i).collect();
    if rows.is_empty() {
        return Err(DatasetError::UnknownKnot(name.to_string()));
    }
    let values = predict_rows(network, data, &rows)?;
    let (mean, std) = mean_std(&values);
    Ok(KnotPrediction {
        name: name.to_string(),
        mean,
        std,
        count: rows.len(),
    })
}

/// One [`KnotPrediction`] per knot, in dataset order.
pub fn knot_predictions(network: &Network, data: &AugmentedDataset) -> Result<Vec<KnotPrediction>, DatasetError> {
    let all: Vec<usize> = (0..data.len()).collect();
    let values = predict_rows(network, data, &all)?;
    let mut grouped: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut order = Vec::new();
    for (row, v) in data.rows.iter().zip(values) {
        grouped
            .entry(row.name.as_str())
            .or_insert_with(|| {
                order.push(row.name.as_str());
                Vec::new()
            })
            .push(v);
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let values = &grouped[name];
            let (mean, std) = mean_std(values);
            KnotPrediction {
                name: name.to_string(),
                mean,
                std,
                count: values.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationViolation {
    pub name: String,
    pub rep: usize,
    pub g4: i64,
    pub tau: i64,
    pub rasmussen_s: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationReport {
    pub rows: usize,
    /// Rows with `[ψ_g] < |[ψ_τ]|`.
    pub tau_violations: Vec<RelationViolation>,
    /// Rows with `2[ψ_g] < |s|`.
    pub rasmussen_violations: Vec<RelationViolation>,
}

impl RelationReport {
    pub fn tau_violation_rate(&self) -> f64 {
        if self.rows == 0 {
            0.0
        } else {
            self.tau_violations.len() as f64 / self.rows as f64
        }
    }
}

/// Audits the rounded predictions of a genus network against a τ network
/// and against the Rasmussen invariant feature.
pub fn relation_check(
    g_network: &Network,
    tau_network: &Network,
    data: &AugmentedDataset,
) -> Result<RelationReport, DatasetError> {
    let all: Vec<usize> = (0..data.len()).collect();
    let g = predict_rows(g_network, data, &all)?;
    let tau = predict_rows(tau_network, data, &all)?;
    Ok(relation_report(data, &g, &tau))
}

/// As [`relation_check`], from per-row predictions already computed.
pub fn relation_report(data: &AugmentedDataset, g: &[f64], tau: &[f64]) -> RelationReport {
    let mut report = RelationReport {
        rows: data.len(),
        ..RelationReport::default()
    };
    for ((row, &g), &tau) in data.rows.iter().zip(g).zip(tau) {
        let violation = RelationViolation {
            name: row.name.clone(),
            rep: row.rep,
            g4: round_half_up(g),
            tau: round_half_up(tau),
            rasmussen_s: row.features.rasmussen_s,
        };
        let rasmussen = 2 * violation.g4 < violation.rasmussen_s.abs();
        if violation.g4 < violation.tau.abs() {
            report.tau_violations.push(violation.clone());
        }
        if rasmussen {
            report.rasmussen_violations.push(violation);
        }
    }
    report
}

/// Records for the 84 knots of the bundled certificate tables, for
/// exercising the pipeline without an external dataset. Labels follow
/// the tables: quasipositive rows have `g4 = τ`, quasinegative rows
/// `g4 = -τ`. Only three features are real: `alternating` is false for
/// these non-alternating knots, the crossing number is read from the
/// name and `rasmussen_s = 2τ`. All other features are zero.
pub fn fixture_records() -> Vec<KnotRecord> {
    let tables = [QUASIPOSITIVE_FIXTURE, QUASINEGATIVE_FIXTURE];
    tables
        .into_iter()
        .flat_map(parse_fixture)
        .map(|row| {
            let row = row.expect("bundled fixtures parse");
            let tau = row.expected_tau;
            let crossings = row
                .name
                .split(|c: char| !c.is_ascii_digit())
                .next()
                .and_then(|d| d.parse().ok())
                .unwrap_or(0);
            let features = FeatureVector {
                alternating: false,
                fibered: false,
                positive_braid_closure: false,
                large: false,
                small: false,
                crossing_number: crossings,
                seifert_genus: 0,
                braid_index: 0,
                signature: 0,
                arc_index: 0,
                determinant: 0,
                rasmussen_s: 2 * tau,
            };
            let labels = Labels {
                quasipositive: Some(row.orientation == Orientation::Positive),
                g4: Some(row.expected_genus()),
                tau: Some(tau),
            };
            KnotRecord::new(row.name, row.certificate.word().clone(), features, labels)
                .expect("fixture words are encodable")
        })
        .collect()
}

const CACHE_MAGIC: &str = "#knotnet-augmented";
pub const CACHE_VERSION: u32 = 1;

fn padding_name(padding: SlotPadding) -> &'static str {
    match padding {
        SlotPadding::Trailing => "trailing",
        SlotPadding::Leading => "leading",
    }
}

/// Writes the augmented rows as TSV under a header line recording the
/// format version, seed, representative count and padding.
pub fn write_cache(data: &AugmentedDataset, mut writer: impl Write) -> Result<(), DatasetError> {
    writeln!(
        writer,
        "{CACHE_MAGIC}\tversion={CACHE_VERSION}\tseed={}\treps={}\tpadding={}",
        data.seed,
        data.reps,
        padding_name(data.padding)
    )?;
    let mut header = vec!["name", "rep", "strands"];
    header.extend(csv_header().into_iter().skip(1));
    writeln!(writer, "{}", header.join("\t"))?;
    for row in &data.rows {
        let mut cells = vec![row.name.clone(), row.rep.to_string(), row.word.strands().to_string()];
        cells.extend(record_cells(&row.word, &row.features, &row.labels));
        writeln!(writer, "{}", cells.join("\t"))?;
    }
    Ok(())
}

fn header_field<T: FromStr>(fields: &BTreeMap<&str, &str>, key: &str) -> Result<T, DatasetError> {
    fields
        .get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| DatasetError::Cache(format!("missing or invalid header field {key}")))
}

pub fn read_cache(reader: impl Read) -> Result<AugmentedDataset, DatasetError> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines
        .next()
        .ok_or_else(|| DatasetError::Cache("empty cache".into()))??;
    let mut parts = first.split('\t');
    if parts.next() != Some(CACHE_MAGIC) {
        return Err(DatasetError::Cache("not an augmented dataset cache".into()));
    }
    let fields: BTreeMap<&str, &str> = parts.filter_map(|p| p.split_once('=')).collect();
    let version: u32 = header_field(&fields, "version")?;
    if version != CACHE_VERSION {
        return Err(DatasetError::Cache(format!("unsupported version {version}")));
    }
    let seed: u64 = header_field(&fields, "seed")?;
    let reps: usize = header_field(&fields, "reps")?;
    let padding = match fields.get("padding").copied() {
        Some("trailing") => SlotPadding::Trailing,
        Some("leading") => SlotPadding::Leading,
        other => return Err(DatasetError::Cache(format!("bad padding {other:?}"))),
    };
    let _column_header = lines.next().transpose()?;
    let mut raw = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| DatasetError::Cache(format!("line {}: {m}", i + 3));
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() < 3 {
            return Err(bad("too few fields".into()));
        }
        let rep: usize = cells[1].parse().map_err(|_| bad("bad rep".into()))?;
        let strands: u8 = cells[2].parse().map_err(|_| bad("bad strand count".into()))?;
        let mut record_fields = vec![cells[0]];
        record_fields.extend_from_slice(&cells[3..]);
        let record = parse_record(&csv::StringRecord::from(record_fields)).map_err(bad)?;
        let word = record.word.with_strands(strands).map_err(|e| bad(e.to_string()))?;
        raw.push((record.name, rep, word, record.features, record.labels));
    }
    build_dataset(raw, padding, reps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn features(crossings: i64, s: i64) -> FeatureVector {
        FeatureVector {
            alternating: false,
            fibered: true,
            positive_braid_closure: false,
            large: true,
            small: false,
            crossing_number: crossings,
            seifert_genus: 2,
            braid_index: 4,
            signature: -2,
            arc_index: 13,
            determinant: 7,
            rasmussen_s: s,
        }
    }

    fn records() -> Vec<KnotRecord> {
        let labels = |g: i64| Labels {
            quasipositive: Some(true),
            g4: Some(g),
            tau: Some(g),
        };
        vec![
            KnotRecord::new("11n_35", parse_braid("AAbAbACBBCC").unwrap(), features(11, 4), labels(2)).unwrap(),
            KnotRecord::new("11n_139", parse_braid("AABaCbCDcBcD").unwrap(), features(11, 0), labels(0)).unwrap(),
            KnotRecord::new("3_1", parse_braid("AAA").unwrap(), features(3, 2), Labels::default()).unwrap(),
        ]
    }

    #[test]
    fn csv_round_trip() {
        let mut buffer = Vec::new();
        write_csv(&records(), &mut buffer).unwrap();
        let report = read_csv(buffer.as_slice()).unwrap();
        assert!(report.rejected.is_empty());
        assert_eq!(report.records, records());
    }

    #[test]
    fn empty_data_section() {
        let text = csv_header().join(",") + "\n";
        let report = read_csv(text.as_bytes()).unwrap();
        assert!(report.records.is_empty() && report.rejected.is_empty());
    }

    #[test]
    fn bad_rows_are_reported_with_line_numbers() {
        let mut text = csv_header().join(",") + "\n";
        text += "3_1,AAA,0,1,1,0,1,3,1,2,-2,4,x,2,1,1,1\n";
        text += "4_1,AbAb,1,1,0,0,1,4,1,3,0,4,5,,,,\n";
        text += "5_1,AAAAA,1,1,1,0,1,5,2,2,-4,7,5,4,1,,\n";
        let report = read_csv(text.as_bytes()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].name, "5_1");
        assert_eq!(report.rejected.len(), 2);
        assert_eq!(report.rejected[0].line, 2);
        assert!(report.rejected[0].message.contains("determinant"));
        assert!(report.rejected[1].message.contains("rasmussen_s"));
    }

    #[test]
    fn schema_is_enforced() {
        assert!(matches!(
            read_csv("name,braid\n".as_bytes()),
            Err(DatasetError::SchemaMismatch { .. })
        ));
        assert!(matches!(load_csv("/nonexistent/knots.csv"), Err(DatasetError::FileNotFound(_))));
    }

    #[test]
    fn tau_bound_is_checked() {
        let labels = Labels {
            quasipositive: None,
            g4: Some(1),
            tau: Some(-2),
        };
        assert!(KnotRecord::new("k", parse_braid("AAA").unwrap(), features(3, 0), labels).is_err());
    }

    #[test]
    fn augmentation_shape() {
        let config = AugmentConfig {
            seed: 4,
            ..AugmentConfig::default()
        };
        let data = augment(&records(), &config).unwrap();
        assert_eq!(data.len(), 3 * DEFAULT_REPS);
        assert_eq!(data.knot_names(), ["11n_139", "11n_35", "3_1"]);
        for name in data.knot_names() {
            let rows: Vec<_> = data.rows_of(name).map(|(_, r)| r).collect();
            assert_eq!(rows.len(), DEFAULT_REPS);
            assert_eq!(rows[0].rep, 1);
            let original = &records().into_iter().find(|r| r.name == name).unwrap();
            assert_eq!(rows[0].word, original.word);
            assert!(rows.iter().all(|r| r.vector.features() == rows[0].vector.features()));
            assert!(rows.iter().all(|r| r.labels == rows[0].labels && r.word.is_encodable()));
        }
        assert_eq!(augment(&records(), &config).unwrap(), data);
    }

    #[test]
    fn single_representative_keeps_originals() {
        let config = AugmentConfig {
            reps: 1,
            ..AugmentConfig::default()
        };
        let data = augment(&records(), &config).unwrap();
        assert_eq!(data.len(), 3);
        assert!(data.rows.iter().all(|r| r.rep == 1));
    }

    #[test]
    fn splits_are_knot_disjoint() {
        let data = augment(&records(), &AugmentConfig::default()).unwrap();
        let labelled = |l: &Labels| l.g4.is_some();
        let split = split_by_knot(&data, 1, 3, labelled).unwrap();
        assert_eq!(split.test.len(), DEFAULT_REPS);
        assert_eq!(split.train.len(), DEFAULT_REPS);
        assert!(!split.test_knots.contains("3_1"));
        let empty = split_by_knot(&data, 0, 3, labelled).unwrap();
        assert!(empty.test.is_empty());
        assert!(matches!(
            split_by_knot(&data, 3, 3, labelled),
            Err(DatasetError::InsufficientLabeledKnots { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(mean_std(&[5.0; 4]), (5.0, 0.0));
    }

    #[test]
    fn cache_round_trip() {
        let config = AugmentConfig {
            reps: 4,
            seed: 99,
            ..AugmentConfig::default()
        };
        let data = augment(&records(), &config).unwrap();
        let mut buffer = Vec::new();
        write_cache(&data, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with("#knotnet-augmented\tversion=1\tseed=99\treps=4"));
        assert_eq!(read_cache(buffer.as_slice()).unwrap(), data);
        assert!(read_cache("garbage\n".as_bytes()).is_err());
    }
}
