//! Dehornoy handle reduction.
//!
//! A `σ_i`-handle is a subword `σ_i^e u σ_i^{-e}` where `u` only uses
//! generators `σ_j` with `j > i`. Reducing it replaces every `σ_{i+1}^d`
//! in `u` by `σ_{i+1}^{-e} σ_i^d σ_{i+1}^e` and deletes the two outer
//! letters. Reducing the handle whose right end comes first always
//! picks a permitted handle, so the process terminates; the word
//! represents the identity iff it ends empty.

use super::{permutation, BraidError, BraidLetter, BraidWord};

/// Default ceiling on the number of handle reductions per query.
pub const DEFAULT_HANDLE_BUDGET: usize = 1_000_000;

/// Reduces `word` until no handle remains. The result is empty iff the
/// word is trivial in `B_n`; otherwise its lowest generator occurs with a
/// single sign.
pub fn handle_reduce(word: &BraidWord, budget: usize) -> Result<BraidWord, BraidError> {
    let mut letters = word.letters().to_vec();
    let mut steps = 0usize;
    // No handle ends before `scan_from`.
    let mut scan_from = 0usize;
    while let Some((start, end)) = first_handle(&letters, scan_from) {
        if steps == budget {
            return Err(BraidError::BudgetExceeded(budget));
        }
        steps += 1;
        let opening = letters[start];
        let i = opening.generator();
        let e = opening.sign();
        let mut rewritten = Vec::with_capacity(letters.len() + 2 * (end - start));
        rewritten.extend_from_slice(&letters[..start]);
        for &letter in &letters[start + 1..end] {
            if letter.generator() == i + 1 {
                rewritten.push(BraidLetter::new(i + 1, e.flip()).expect("generator in range"));
                rewritten.push(BraidLetter::new(i, letter.sign()).expect("generator in range"));
                rewritten.push(BraidLetter::new(i + 1, e).expect("generator in range"));
            } else {
                rewritten.push(letter);
            }
        }
        rewritten.extend_from_slice(&letters[end + 1..]);
        letters = rewritten;
        scan_from = start;
    }
    Ok(BraidWord::from_parts_unchecked(letters, word.strands()))
}

/// Finds the handle with the leftmost right end at or after `from`.
fn first_handle(letters: &[BraidLetter], from: usize) -> Option<(usize, usize)> {
    for end in from..letters.len() {
        let closing = letters[end];
        let i = closing.generator();
        for start in (0..end).rev() {
            let letter = letters[start];
            if letter.generator() > i {
                continue;
            }
            if letter.generator() == i && letter.sign() != closing.sign() {
                return Some((start, end));
            }
            break;
        }
    }
    None
}

/// Decides `w1 = w2` in `B_n` with the default step budget.
pub fn words_equal(w1: &BraidWord, w2: &BraidWord) -> Result<bool, BraidError> {
    words_equal_with_budget(w1, w2, DEFAULT_HANDLE_BUDGET)
}

/// Decides `w1 = w2`, viewing both words in the larger of their two braid
/// groups. `BudgetExceeded` means the answer is unknown.
pub fn words_equal_with_budget(
    w1: &BraidWord,
    w2: &BraidWord,
    budget: usize,
) -> Result<bool, BraidError> {
    let strands = w1.strands().max(w2.strands());
    let a = w1.with_strands(strands)?;
    let b = w2.with_strands(strands)?;
    if permutation(&a) != permutation(&b) {
        return Ok(false);
    }
    let quotient = a.concat(&b.inverse());
    Ok(handle_reduce(&quotient, budget)?.is_empty())
}
