use std::io::Write;
use std::path::Path;

use knotnet_core::braid::parse_braid;
use knotnet_core::dataset::{self, AugmentConfig, AugmentedDataset, KnotRecord};
use knotnet_core::encoding::{encode_word_with, one_hot_index, SlotPadding};

use crate::{CliError, CliResult, CommonArgs, PaddingArg};

impl From<PaddingArg> for SlotPadding {
    fn from(p: PaddingArg) -> Self {
        match p {
            PaddingArg::Trailing => SlotPadding::Trailing,
            PaddingArg::Leading => SlotPadding::Leading,
        }
    }
}

/// Loads the CSV, reporting rejected rows on `stderr`.
pub(crate) fn load_records(path: &Path, stderr: &mut dyn Write) -> CliResult<Vec<KnotRecord>> {
    let report = dataset::load_csv(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    for rejected in &report.rejected {
        writeln!(stderr, "warning: {}:{}: {}", path.display(), rejected.line, rejected.message)?;
    }
    Ok(report.records)
}

pub(crate) fn augment_records(
    common: &CommonArgs,
    records: &[KnotRecord],
    padding: SlotPadding,
) -> CliResult<AugmentedDataset> {
    let config = AugmentConfig {
        reps: common.reps,
        padding,
        seed: common.seed,
        ..AugmentConfig::default()
    };
    dataset::augment(records, &config).map_err(CliError::data)
}

pub(crate) fn augment(
    common: &CommonArgs,
    data: &Path,
    padding: PaddingArg,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let records = load_records(data, stderr)?;
    let augmented = augment_records(common, &records, padding.into())?;
    dataset::write_cache(&augmented, out).map_err(CliError::data)
}

pub(crate) fn encode(braids: &[String], padding: PaddingArg, out: &mut dyn Write) -> CliResult {
    writeln!(out, "braid\tlength\tletter_indices\tvector")?;
    for text in braids {
        let word = parse_braid(text).map_err(|e| CliError::data(format!("{text:?}: {e}")))?;
        let vector = encode_word_with(&word, padding.into()).map_err(|e| CliError::data(format!("{text}: {e}")))?;
        let indices: Vec<String> = word.letters().iter().map(|&l| one_hot_index(l).to_string()).collect();
        let dense: Vec<&str> = vector.iter().map(|&v| if v == 1.0 { "1" } else { "0" }).collect();
        writeln!(out, "{word}\t{}\t{}\t{}", word.len(), indices.join(","), dense.join(","))?;
    }
    Ok(())
}
