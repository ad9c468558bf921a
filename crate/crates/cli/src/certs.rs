use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use knotnet_core::dataset::predict_rows;
use knotnet_core::quasipos::{
    parse_fixture, search_certificate, verify_certificate, verify_quasinegative, Orientation,
    QUASINEGATIVE_FIXTURE, QUASIPOSITIVE_FIXTURE,
};
use knotnet_core::rng::derive_seed;

use crate::data::load_records;
use crate::models::{load_model, model_dataset};
use crate::{CliError, CliResult, CommonArgs};

pub(crate) fn verify_certs(fixtures: &[PathBuf], out: &mut dyn Write) -> CliResult {
    let sources: Vec<(String, String)> = if fixtures.is_empty() {
        vec![
            ("bundled:quasipositive".into(), QUASIPOSITIVE_FIXTURE.into()),
            ("bundled:quasinegative".into(), QUASINEGATIVE_FIXTURE.into()),
        ]
    } else {
        fixtures
            .iter()
            .map(|p| {
                fs::read_to_string(p)
                    .map(|text| (p.display().to_string(), text))
                    .map_err(|e| CliError::data(format!("{}: {e}", p.display())))
            })
            .collect::<CliResult<_>>()?
    };
    writeln!(
        out,
        "source\tline\tknot\tstatus\tbands\tstrands\tg4\texpected_g4\ttau\tmethod\tdetail"
    )?;
    let (mut passed, mut total) = (0, 0);
    for (source, text) in &sources {
        for row in parse_fixture(text) {
            total += 1;
            let row = match row {
                Ok(row) => row,
                Err(e) => {
                    writeln!(out, "{source}\t{}\t\tfail\t\t\t\t\t\t\t{}", e.line, e.message)?;
                    continue;
                }
            };
            let result = match row.orientation {
                Orientation::Positive => verify_certificate(&row.certificate),
                Orientation::Negative => verify_quasinegative(&row.certificate),
            };
            let expected = row.expected_genus();
            let (status, detail) = match &result {
                Err(e) => ("fail", e.to_string()),
                Ok(r) if !r.valid => ("fail", r.rejection.map(|x| x.to_string()).unwrap_or_default()),
                Ok(r) if r.genus != Some(expected) => ("fail", "genus differs from the table".to_string()),
                Ok(_) => ("pass", String::new()),
            };
            if status == "pass" {
                passed += 1;
            }
            let r = result.ok();
            let genus = r.as_ref().and_then(|r| r.genus);
            let tau = genus.map(|g| match row.orientation {
                Orientation::Positive => g,
                Orientation::Negative => -g,
            });
            writeln!(
                out,
                "{source}\t{}\t{}\t{status}\t{}\t{}\t{}\t{expected}\t{}\t{}\t{detail}",
                row.line,
                row.name,
                r.as_ref().map(|r| r.band_count.to_string()).unwrap_or_default(),
                r.as_ref().map(|r| r.strands.to_string()).unwrap_or_default(),
                genus.map(|g| g.to_string()).unwrap_or_default(),
                tau.map(|t| t.to_string()).unwrap_or_default(),
                r.as_ref()
                    .and_then(|r| r.equality_method)
                    .map(|m| m.to_string())
                    .unwrap_or_default(),
            )?;
        }
    }
    writeln!(out, "# passed\t{passed}/{total}")?;
    if passed == total {
        Ok(())
    } else {
        Err(CliError::verification(format!("{} of {total} certificates failed", total - passed)))
    }
}

pub(crate) fn search_qp(
    common: &CommonArgs,
    data: &Path,
    model_path: &Path,
    out: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let (model, network, target) = load_model(model_path)?;
    if target.name() != "qp" {
        return Err(CliError::data(format!(
            "{}: search-qp needs a qp model, found {}",
            model_path.display(),
            target.name()
        )));
    }
    let records = load_records(data, stderr)?;
    let dataset = model_dataset(common, &model, &records)?;
    let all: Vec<usize> = (0..dataset.len()).collect();
    let probabilities = predict_rows(&network, &dataset, &all).map_err(CliError::data)?;
    let mut candidates: Vec<(usize, f64)> = probabilities
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p >= common.cutoff)
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    writeln!(out, "# knot\tbraid\tcenters\ttau\torientation")?;
    let mut searched = HashSet::new();
    for (index, probability) in candidates {
        let row = &dataset.rows[index];
        if !searched.insert((row.name.clone(), row.word.clone())) {
            continue;
        }
        let seed = derive_seed(common.seed, &format!("search/{}/{}", row.name, row.rep));
        let Some(cert) = search_certificate(&row.word, common.budget, seed) else {
            continue;
        };
        let genus = verify_certificate(&cert)
            .ok()
            .and_then(|r| r.genus)
            .ok_or_else(|| CliError::data("search returned an unverified certificate"))?;
        log::info!("{} rep {} (p = {probability:.4}) certified", row.name, row.rep);
        writeln!(
            out,
            "{}\t{}\t{}\t{genus}\tpositive",
            row.name,
            cert.word(),
            cert.centers_text()
        )?;
    }
    Ok(())
}
