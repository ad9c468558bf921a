//! Writes the bundled certificate knots as an input CSV.

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = knotnet_core::dataset::fixture_records();
    knotnet_core::dataset::write_csv(&records, std::io::stdout().lock())?;
    Ok(())
}
