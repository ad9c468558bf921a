use knotnet_core::braid::{
    free_reduce, handle_reduce, is_knot_closure, mirror, parse_braid, permutation,
    random_equivalent, words_equal, writhe, BraidLetter, BraidWord, MoveBounds, Sign,
    DEFAULT_HANDLE_BUDGET,
};
use knotnet_core::encoding::{decode_word, encode_word, one_hot_index};
use proptest::prelude::*;

fn letter() -> impl Strategy<Value = BraidLetter> {
    (1u8..=6, any::<bool>()).prop_map(|(g, positive)| {
        let sign = if positive { Sign::Positive } else { Sign::Negative };
        BraidLetter::new(g, sign).unwrap()
    })
}

fn word(max_len: usize) -> impl Strategy<Value = BraidWord> {
    prop::collection::vec(letter(), 0..=max_len).prop_map(BraidWord::from_letters)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn format_parse_round_trip(w in word(19)) {
        let parsed = parse_braid(&w.to_string()).unwrap();
        prop_assert_eq!(parsed.letters(), w.letters());
    }

    #[test]
    fn free_reduce_is_idempotent_and_shrinks(w in word(19)) {
        let once = free_reduce(&w);
        prop_assert!(once.len() <= w.len());
        prop_assert_eq!(free_reduce(&once), once.clone());
        prop_assert_eq!(writhe(&once), writhe(&w));
    }

    #[test]
    fn words_equal_is_reflexive_and_symmetric(a in word(10), b in word(10)) {
        prop_assert!(words_equal(&a, &a).unwrap());
        prop_assert!(words_equal(&a, &free_reduce(&a)).unwrap());
        prop_assert_eq!(words_equal(&a, &b).unwrap(), words_equal(&b, &a).unwrap());
    }

    #[test]
    fn word_times_inverse_is_trivial(w in word(12)) {
        let product = w.concat(&w.inverse());
        prop_assert!(handle_reduce(&product, DEFAULT_HANDLE_BUDGET).unwrap().is_empty());
    }

    #[test]
    fn mirror_negates_writhe(w in word(19)) {
        prop_assert_eq!(writhe(&mirror(&w)), -writhe(&w));
        prop_assert_eq!(mirror(&mirror(&w)), w);
    }

    #[test]
    fn encoding_round_trip(w in word(19)) {
        let encoded = encode_word(&w).unwrap();
        prop_assert_eq!(encoded.len(), 228);
        let decoded = decode_word(&encoded).unwrap();
        prop_assert_eq!(decoded.letters(), w.letters());
        for block in encoded.chunks(12) {
            let l1: f64 = block.iter().map(|v| v.abs()).sum();
            prop_assert!(l1 == 0.0 || l1 == 1.0);
        }
    }

    #[test]
    fn one_hot_index_formula(l in letter()) {
        let k = l.generator() as i32;
        let e = l.sign().as_i32();
        prop_assert_eq!(one_hot_index(l) as i32, k + 3 * (1 - e));
        prop_assert!((1..=12).contains(&one_hot_index(l)));
    }

    #[test]
    fn random_moves_keep_knots_and_bounds(seed in any::<u64>(), moves in 0usize..30) {
        let base = parse_braid("AAbAbACBBCC").unwrap();
        let bounds = MoveBounds::default();
        let out = random_equivalent(&base, moves, bounds, seed);
        prop_assert!(bounds.admits(&out));
        prop_assert!(is_knot_closure(&out));
        // an n-cycle has sign (-1)^(n-1) and the word length has the parity of the writhe
        prop_assert_eq!((writhe(&out) - i32::from(out.strands()) + 1).rem_euclid(2), 0);
    }
}

#[test]
fn conjugation_preserves_cycle_type() {
    let base = parse_braid("AABaCbCDcBcD").unwrap();
    let c = BraidLetter::positive(2).unwrap();
    let conj = knotnet_core::braid::conjugate(&base, c).unwrap();
    assert_eq!(permutation(&conj).cycle_type(), permutation(&base).cycle_type());
}
