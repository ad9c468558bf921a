use knotnet_core::braid::words_equal;
use knotnet_core::quasipos::{
    band_product, bands_from_certificate, parse_fixture, verify_certificate, verify_quasinegative,
    CertificateRow, EqualityMethod, Orientation, QUASINEGATIVE_FIXTURE, QUASIPOSITIVE_FIXTURE,
};

fn rows(text: &str) -> Vec<CertificateRow> {
    parse_fixture(text).into_iter().map(Result::unwrap).collect()
}

#[test]
fn quasipositive_table_verifies_with_expected_genus() {
    let rows = rows(QUASIPOSITIVE_FIXTURE);
    assert_eq!(rows.len(), 72);
    let mut handle = Vec::new();
    for row in &rows {
        let result = verify_certificate(&row.certificate).unwrap();
        assert!(result.valid, "{}: {:?}", row.name, result.rejection);
        assert_eq!(result.genus, Some(row.expected_tau), "{}", row.name);
        if result.equality_method == Some(EqualityMethod::HandleReduction) {
            handle.push(row.name.as_str());
        }
    }
    let genus = |name: &str| rows.iter().find(|r| r.name == name).unwrap().expected_genus();
    assert_eq!(genus("11n_35"), 2);
    assert_eq!(genus("11n_139"), 0);
    assert_eq!(genus("12n_671"), 3);
    assert_eq!(genus("12n_830"), 3);
    assert!(handle.contains(&"12n_81"), "{handle:?}");
}

#[test]
fn quasinegative_table_verifies_through_the_mirror() {
    for row in rows(QUASINEGATIVE_FIXTURE) {
        assert_eq!(row.orientation, Orientation::Negative);
        let result = verify_quasinegative(&row.certificate).unwrap();
        assert!(result.valid, "{}", row.name);
        assert_eq!(result.genus.map(|g| -g), Some(row.expected_tau), "{}", row.name);
        if row.name == "11n_1" {
            assert_eq!(result.genus, Some(1));
        }
    }
}

#[test]
fn band_products_equal_words_under_handle_reduction() {
    let all = rows(QUASIPOSITIVE_FIXTURE)
        .into_iter()
        .chain(rows(QUASINEGATIVE_FIXTURE).into_iter().map(|mut r| {
            r.certificate = r.certificate.mirrored();
            r
        }));
    let mut count = 0;
    for row in all {
        let cert = &row.certificate;
        let bands = bands_from_certificate(cert).unwrap();
        let product = band_product(&bands, cert.word().strands());
        assert!(words_equal(&product, cert.word()).unwrap(), "{}", row.name);
        count += 1;
    }
    assert_eq!(count, 84);
}
