//! Bounded search for band-center certificates.
//!
//! Stage one tries every set of `w(β)` positive positions of the word,
//! ordered by the free-reduced length of the residual (the non-center
//! letters). Stage two rewrites the word by random knot-preserving moves
//! and retries stage one on each rewrite.

use std::collections::HashSet;

use itertools::Itertools;

use super::{verify_certificate_with_budget, BandCertificate};
use crate::braid::{
    free_reduce, is_knot_closure, permutation, random_equivalent_with, writhe, BraidWord,
    MoveBounds, MoveRegistry, DEFAULT_HANDLE_BUDGET,
};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Number of random rewrites tried after the word itself.
    pub rewrite_budget: usize,
    /// Random moves between consecutive rewrites.
    pub moves_per_rewrite: usize,
    pub handle_budget: usize,
    pub bounds: MoveBounds,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rewrite_budget: 0,
            moves_per_rewrite: 3,
            handle_budget: DEFAULT_HANDLE_BUDGET,
            bounds: MoveBounds::default(),
            seed: 0,
        }
    }
}

/// Returns the first verified certificate found, if any. Absence is not
/// evidence against quasipositivity.
pub fn search_certificate(
    word: &BraidWord,
    rewrite_budget: usize,
    seed: u64,
) -> Option<BandCertificate> {
    search_certificate_with(
        word,
        &SearchOptions {
            rewrite_budget,
            seed,
            ..SearchOptions::default()
        },
    )
}

pub fn search_certificate_with(
    word: &BraidWord,
    options: &SearchOptions,
) -> Option<BandCertificate> {
    if !is_knot_closure(word) {
        return None;
    }
    if let Some(found) = search_on_word(word, options.handle_budget) {
        return Some(found);
    }
    let registry = MoveRegistry::default();
    let mut rng = seeded(options.seed);
    let mut tried = HashSet::from([word.clone()]);
    let mut current = word.clone();
    for _ in 0..options.rewrite_budget {
        let (next, _) = random_equivalent_with(
            &registry,
            &current,
            options.moves_per_rewrite,
            options.bounds,
            &mut rng,
        );
        current = next;
        if !tried.insert(current.clone()) {
            continue;
        }
        if let Some(found) = search_on_word(&current, options.handle_budget) {
            return Some(found);
        }
    }
    None
}

fn search_on_word(word: &BraidWord, handle_budget: usize) -> Option<BandCertificate> {
    let bands = usize::try_from(writhe(word)).ok()?;
    if bands + 1 < word.strands() as usize {
        // would give negative genus
        return None;
    }
    let positives: Vec<usize> = word.positive_positions().map(|p| p + 1).collect();
    if bands > positives.len() {
        return None;
    }
    let mut candidates: Vec<(usize, BandCertificate)> = positives
        .into_iter()
        .combinations(bands)
        .filter_map(|centers| {
            let cert = BandCertificate::new(word.clone(), centers).ok()?;
            let residual = cert.residual();
            // a trivial residual must induce the identity permutation
            if !permutation(&residual).is_identity() {
                return None;
            }
            Some((free_reduce(&residual).len(), cert))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.centers().cmp(b.1.centers())));
    candidates.into_iter().map(|(_, c)| c).find(|cert| {
        matches!(
            verify_certificate_with_budget(cert, handle_budget),
            Ok(result) if result.valid
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::parse_braid;
    use crate::quasipos::verify_certificate;

    #[test]
    fn positive_word_uses_every_letter() {
        let word = parse_braid("AAA").unwrap();
        let cert = search_certificate(&word, 0, 1).unwrap();
        assert_eq!(cert.centers(), &[1, 2, 3]);
    }

    #[test]
    fn finds_a_certificate_for_table_braid() {
        let word = parse_braid("AABaCbCDcBcD").unwrap();
        let cert = search_certificate(&word, 0, 1).unwrap();
        let result = verify_certificate(&cert).unwrap();
        assert!(result.valid);
        assert_eq!(result.band_count, 4);
        assert_eq!(result.genus, Some(0));
    }

    #[test]
    fn negative_writhe_has_no_certificate() {
        let word = parse_braid("a").unwrap();
        assert_eq!(search_certificate(&word, 0, 1), None);
    }

    #[test]
    fn rewritten_search_results_verify() {
        let base = parse_braid("AAbAbACBBCC").unwrap();
        for seed in 0..5 {
            let word = crate::braid::random_equivalent(&base, 10, MoveBounds::default(), seed);
            if let Some(cert) = search_certificate(&word, 20, seed) {
                assert!(verify_certificate(&cert).unwrap().valid, "{word}");
            }
        }
    }

    #[test]
    fn search_is_deterministic() {
        let word = parse_braid("AbAbbACBBBC").unwrap();
        assert_eq!(search_certificate(&word, 50, 9), search_certificate(&word, 50, 9));
    }
}
