//! Braid words over the Artin generators `σ_1 .. σ_6` and the rewriting
//! moves that preserve either the braid itself or the knot type of its
//! closure.
//!
//! Words are written in the compact letter alphabet `A..F` for
//! `σ_1..σ_6` and `a..f` for their inverses, with no separators.

mod handle;
mod moves;

pub use handle::{handle_reduce, words_equal, words_equal_with_budget, DEFAULT_HANDLE_BUDGET};
pub use moves::{
    random_equivalent, random_equivalent_with, MoveBounds, MoveRegistry, RewriteMove,
    DEFAULT_MOVES,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest generator index the letter alphabet can express.
pub const MAX_GENERATOR: u8 = 6;
/// Strand count of the largest braid group whose words are encodable.
pub const MAX_STRANDS: u8 = MAX_GENERATOR + 1;
/// Longest word the slot encoding accepts.
pub const MAX_ENCODABLE_LENGTH: usize = 19;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidError {
    #[error("invalid character {found:?} at offset {offset}")]
    InvalidCharacter { found: char, offset: usize },
    #[error("generator σ_{generator} is out of range for {strands} strands")]
    GeneratorOutOfRange { generator: u8, strands: u8 },
    #[error("strand count {0} is outside 2..={MAX_STRANDS}")]
    StrandLimitExceeded(u8),
    #[error("word cannot be destabilized: {0}")]
    NotDestabilizable(&'static str),
    #[error("letters at index {index} do not match the {kind:?} pattern")]
    PatternMismatch { index: usize, kind: RelationKind },
    #[error("handle reduction exceeded its budget of {0} steps")]
    BudgetExceeded(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Positive,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A single Artin generator `σ_k^{±1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BraidLetter {
    generator: u8,
    sign: Sign,
}

impl BraidLetter {
    pub fn new(generator: u8, sign: Sign) -> Result<Self, BraidError> {
        if generator == 0 || generator > MAX_GENERATOR {
            return Err(BraidError::GeneratorOutOfRange {
                generator,
                strands: MAX_STRANDS,
            });
        }
        Ok(Self { generator, sign })
    }

    pub fn positive(generator: u8) -> Result<Self, BraidError> {
        Self::new(generator, Sign::Positive)
    }

    pub fn negative(generator: u8) -> Result<Self, BraidError> {
        Self::new(generator, Sign::Negative)
    }

    pub fn generator(self) -> u8 {
        self.generator
    }

    pub fn sign(self) -> Sign {
        self.sign
    }

    pub fn is_positive(self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn inverse(self) -> Self {
        Self {
            generator: self.generator,
            sign: self.sign.flip(),
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        let (base, sign) = if c.is_ascii_uppercase() {
            (b'A', Sign::Positive)
        } else if c.is_ascii_lowercase() {
            (b'a', Sign::Negative)
        } else {
            return None;
        };
        let generator = (c as u8).checked_sub(base)? + 1;
        (generator <= MAX_GENERATOR).then_some(Self { generator, sign })
    }

    pub fn to_char(self) -> char {
        let base = match self.sign {
            Sign::Positive => b'A',
            Sign::Negative => b'a',
        };
        (base + self.generator - 1) as char
    }
}

impl fmt::Display for BraidLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A word in the generators of `B_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BraidWord {
    letters: Vec<BraidLetter>,
    strands: u8,
}

impl BraidWord {
    pub fn new(letters: Vec<BraidLetter>, strands: u8) -> Result<Self, BraidError> {
        if !(2..=MAX_STRANDS).contains(&strands) {
            return Err(BraidError::StrandLimitExceeded(strands));
        }
        if let Some(bad) = letters.iter().find(|l| l.generator >= strands) {
            return Err(BraidError::GeneratorOutOfRange {
                generator: bad.generator,
                strands,
            });
        }
        Ok(Self { letters, strands })
    }

    /// Builds a word on the fewest strands that hold all of its letters.
    pub fn from_letters(letters: Vec<BraidLetter>) -> Self {
        let strands = minimal_strands(&letters);
        Self { letters, strands }
    }

    pub fn empty(strands: u8) -> Result<Self, BraidError> {
        Self::new(Vec::new(), strands)
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn strands(&self) -> u8 {
        self.strands
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_encodable(&self) -> bool {
        self.letters.len() <= MAX_ENCODABLE_LENGTH && self.strands <= MAX_STRANDS
    }

    /// The same letters viewed in `B_m` for `m ≥ n`.
    pub fn with_strands(&self, strands: u8) -> Result<Self, BraidError> {
        Self::new(self.letters.clone(), strands)
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
            strands: self.strands,
        }
    }

    /// Concatenation in `B_max(n, m)`.
    pub fn concat(&self, other: &BraidWord) -> Self {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Self {
            letters,
            strands: self.strands.max(other.strands),
        }
    }

    pub fn positive_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_positive())
            .map(|(i, _)| i)
    }

    pub(crate) fn from_parts_unchecked(letters: Vec<BraidLetter>, strands: u8) -> Self {
        debug_assert!(letters.iter().all(|l| l.generator < strands));
        Self { letters, strands }
    }
}

fn minimal_strands(letters: &[BraidLetter]) -> u8 {
    letters
        .iter()
        .map(|l| l.generator + 1)
        .max()
        .unwrap_or(2)
        .max(2)
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.letters {
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

impl FromStr for BraidWord {
    type Err = BraidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_braid(s)
    }
}

pub fn parse_braid(text: &str) -> Result<BraidWord, BraidError> {
    let letters = text
        .chars()
        .enumerate()
        .map(|(offset, c)| {
            BraidLetter::from_char(c).ok_or(BraidError::InvalidCharacter { found: c, offset })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BraidWord::from_letters(letters))
}

pub fn format_braid(word: &BraidWord) -> String {
    word.to_string()
}

/// Algebraic length: positive letters minus negative letters.
pub fn writhe(word: &BraidWord) -> i32 {
    word.letters.iter().map(|l| l.sign.as_i32()).sum()
}

pub fn mirror(word: &BraidWord) -> BraidWord {
    BraidWord {
        letters: word.letters.iter().map(|l| l.inverse()).collect(),
        strands: word.strands,
    }
}

/// Deletes adjacent `σ_j^ε σ_j^{-ε}` pairs until none remain.
pub fn free_reduce(word: &BraidWord) -> BraidWord {
    let mut stack: Vec<BraidLetter> = Vec::with_capacity(word.len());
    for &letter in &word.letters {
        if stack.last() == Some(&letter.inverse()) {
            stack.pop();
        } else {
            stack.push(letter);
        }
    }
    BraidWord {
        letters: stack,
        strands: word.strands,
    }
}

/// Permutation induced on strand positions; `images[i]` is the final
/// position of the strand that starts at position `i` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycle lengths in descending order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.images.len()];
        let mut cycles = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut at = start;
            while !seen[at] {
                seen[at] = true;
                at = self.images[at];
                len += 1;
            }
            cycles.push(len);
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        cycles
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, image) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", image + 1)?;
        }
        write!(f, "]")
    }
}

pub fn permutation(word: &BraidWord) -> Permutation {
    let n = word.strands as usize;
    // strand_at[p] = strand currently occupying position p
    let mut strand_at: Vec<usize> = (0..n).collect();
    for letter in &word.letters {
        let j = letter.generator as usize;
        strand_at.swap(j - 1, j);
    }
    let mut images = vec![0; n];
    for (position, &strand) in strand_at.iter().enumerate() {
        images[strand] = position;
    }
    Permutation { images }
}

/// True iff the closure of the braid has a single component.
pub fn is_knot_closure(word: &BraidWord) -> bool {
    permutation(word).cycle_type() == [word.strands as usize]
}

/// `c · word · c^{-1}`.
pub fn conjugate(word: &BraidWord, c: BraidLetter) -> Result<BraidWord, BraidError> {
    if c.generator >= word.strands {
        return Err(BraidError::GeneratorOutOfRange {
            generator: c.generator,
            strands: word.strands,
        });
    }
    let mut letters = Vec::with_capacity(word.len() + 2);
    letters.push(c);
    letters.extend_from_slice(&word.letters);
    letters.push(c.inverse());
    Ok(BraidWord {
        letters,
        strands: word.strands,
    })
}

/// Cyclic rotation moving the first `k` letters to the end (a conjugation).
pub fn rotate(word: &BraidWord, k: usize) -> BraidWord {
    let mut letters = word.letters.clone();
    if !letters.is_empty() {
        let k = k % letters.len();
        letters.rotate_left(k);
    }
    BraidWord {
        letters,
        strands: word.strands,
    }
}

/// Markov stabilization: appends `σ_n^{sign}` and moves to `B_{n+1}`.
pub fn stabilize(word: &BraidWord, sign: Sign) -> Result<BraidWord, BraidError> {
    let n = word.strands;
    if n >= MAX_STRANDS {
        return Err(BraidError::StrandLimitExceeded(n + 1));
    }
    let mut letters = word.letters.clone();
    letters.push(BraidLetter { generator: n, sign });
    Ok(BraidWord {
        letters,
        strands: n + 1,
    })
}

/// Inverse of [`stabilize`]. The single occurrence of `σ_{n-1}^{±1}` is
/// first rotated to the end of the word.
pub fn destabilize(word: &BraidWord) -> Result<BraidWord, BraidError> {
    let n = word.strands;
    if n <= 2 {
        return Err(BraidError::NotDestabilizable("already on two strands"));
    }
    let top = n - 1;
    let mut occurrences = word
        .letters
        .iter()
        .enumerate()
        .filter(|(_, l)| l.generator == top)
        .map(|(i, _)| i);
    let position = match (occurrences.next(), occurrences.next()) {
        (Some(p), None) => p,
        (None, _) => return Err(BraidError::NotDestabilizable("top generator absent")),
        (Some(_), Some(_)) => {
            return Err(BraidError::NotDestabilizable(
                "top generator occurs more than once",
            ))
        }
    };
    let mut letters = rotate(word, position + 1).letters;
    letters.pop();
    Ok(BraidWord {
        letters,
        strands: n - 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    /// `σ_i^a σ_j^b = σ_j^b σ_i^a` for `|i - j| ≥ 2`.
    Commute,
    /// `σ_i σ_j σ_i = σ_j σ_i σ_j` for `|i - j| = 1`, its all-inverse
    /// form, and the conjugation form `σ_i^e σ_j^d σ_i^{-e} = σ_j^{-e} σ_i^d σ_j^e`.
    BraidRelation,
}

/// Rewrites the letters starting at the 0-based `index` by a defining
/// relation of `B_n`.
pub fn apply_relation_move(
    word: &BraidWord,
    index: usize,
    kind: RelationKind,
) -> Result<BraidWord, BraidError> {
    let mismatch = BraidError::PatternMismatch { index, kind };
    let mut letters = word.letters.clone();
    match kind {
        RelationKind::Commute => {
            let (x, y) = match (letters.get(index), letters.get(index + 1)) {
                (Some(&x), Some(&y)) => (x, y),
                _ => return Err(mismatch),
            };
            if x.generator.abs_diff(y.generator) < 2 {
                return Err(mismatch);
            }
            letters.swap(index, index + 1);
        }
        RelationKind::BraidRelation => {
            let (x, y, z) = match letters.get(index..index + 3) {
                Some(&[x, y, z]) => (x, y, z),
                _ => return Err(mismatch),
            };
            if x.generator != z.generator || x.generator.abs_diff(y.generator) != 1 {
                return Err(mismatch);
            }
            let (i, j) = (x.generator, y.generator);
            let replacement = if x.sign == y.sign && y.sign == z.sign {
                [
                    BraidLetter { generator: j, sign: x.sign },
                    BraidLetter { generator: i, sign: x.sign },
                    BraidLetter { generator: j, sign: x.sign },
                ]
            } else if z.sign == x.sign.flip() {
                let e = x.sign;
                [
                    BraidLetter { generator: j, sign: e.flip() },
                    BraidLetter { generator: i, sign: y.sign },
                    BraidLetter { generator: j, sign: e },
                ]
            } else {
                return Err(mismatch);
            };
            letters[index..index + 3].copy_from_slice(&replacement);
        }
    }
    Ok(BraidWord {
        letters,
        strands: word.strands,
    })
}
