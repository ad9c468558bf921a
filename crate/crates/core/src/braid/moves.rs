//! Random Markov and group-relation rewriting.
//!
//! Each move is a [`RewriteMove`] registered by name in a
//! [`MoveRegistry`]; [`random_equivalent`] draws moves uniformly from the
//! registry and applies them at random sites.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{
    apply_relation_move, conjugate, destabilize, free_reduce, rotate, stabilize, BraidLetter,
    BraidWord, RelationKind, Sign, MAX_ENCODABLE_LENGTH, MAX_STRANDS,
};
use crate::rng::{seeded, SeededRng};

/// A rewrite that preserves the knot type of the braid closure.
pub trait RewriteMove: Send + Sync {
    fn name(&self) -> &'static str;

    /// Applies the move at a randomly chosen site, or returns `None` when
    /// no site admits it.
    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord>;
}

/// Names of the moves in [`MoveRegistry::default`], in draw order.
pub const DEFAULT_MOVES: [&str; 8] = [
    "free_insert",
    "free_reduce",
    "commute",
    "braid_relation",
    "conjugate",
    "rotate",
    "stabilize",
    "destabilize",
];

#[derive(Clone)]
pub struct MoveRegistry {
    moves: Vec<(String, Arc<dyn RewriteMove>)>,
}

impl MoveRegistry {
    pub fn empty() -> Self {
        Self { moves: Vec::new() }
    }

    /// Registers `mv` under its own name, replacing any move of that name.
    pub fn register(&mut self, mv: Arc<dyn RewriteMove>) {
        let name = mv.name().to_string();
        if let Some(slot) = self.moves.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = mv;
        } else {
            self.moves.push((name, mv));
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn RewriteMove>> {
        self.moves
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.clone())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.moves.iter().map(|(n, _)| n.as_str())
    }

    /// A registry restricted to the named moves.
    pub fn only(&self, names: &[&str]) -> Self {
        Self {
            moves: self
                .moves
                .iter()
                .filter(|(n, _)| names.contains(&n.as_str()))
                .cloned()
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

impl Default for MoveRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(FreeInsert));
        registry.register(Arc::new(FreeReduce));
        registry.register(Arc::new(Relation {
            name: "commute",
            kind: RelationKind::Commute,
        }));
        registry.register(Arc::new(Relation {
            name: "braid_relation",
            kind: RelationKind::BraidRelation,
        }));
        registry.register(Arc::new(Conjugate));
        registry.register(Arc::new(Rotate));
        registry.register(Arc::new(Stabilize));
        registry.register(Arc::new(Destabilize));
        registry
    }
}

fn random_letter(strands: u8, rng: &mut SeededRng) -> BraidLetter {
    let generator = rng.random_range(1..strands);
    let sign = if rng.random_bool(0.5) {
        Sign::Positive
    } else {
        Sign::Negative
    };
    BraidLetter::new(generator, sign).expect("generator below strand count")
}

struct FreeInsert;

impl RewriteMove for FreeInsert {
    fn name(&self) -> &'static str {
        "free_insert"
    }

    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord> {
        let letter = random_letter(word.strands(), rng);
        let at = rng.random_range(0..=word.len());
        let mut letters = word.letters().to_vec();
        letters.splice(at..at, [letter, letter.inverse()]);
        Some(BraidWord::from_parts_unchecked(letters, word.strands()))
    }
}

struct FreeReduce;

impl RewriteMove for FreeReduce {
    fn name(&self) -> &'static str {
        "free_reduce"
    }

    fn apply(&self, word: &BraidWord, _rng: &mut SeededRng) -> Option<BraidWord> {
        let reduced = free_reduce(word);
        (reduced.len() < word.len()).then_some(reduced)
    }
}

struct Relation {
    name: &'static str,
    kind: RelationKind,
}

impl RewriteMove for Relation {
    fn name(&self) -> &'static str {
        self.name
    }

    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord> {
        let sites: Vec<BraidWord> = (0..word.len())
            .filter_map(|i| apply_relation_move(word, i, self.kind).ok())
            .collect();
        sites.choose(rng).cloned()
    }
}

struct Conjugate;

impl RewriteMove for Conjugate {
    fn name(&self) -> &'static str {
        "conjugate"
    }

    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord> {
        let letter = random_letter(word.strands(), rng);
        let conjugated = conjugate(word, letter).ok()?;
        // cancel against the word's own ends where possible
        Some(free_reduce(&conjugated))
    }
}

struct Rotate;

impl RewriteMove for Rotate {
    fn name(&self) -> &'static str {
        "rotate"
    }

    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord> {
        if word.len() < 2 {
            return None;
        }
        let k = rng.random_range(1..word.len());
        Some(rotate(word, k))
    }
}

struct Stabilize;

impl RewriteMove for Stabilize {
    fn name(&self) -> &'static str {
        "stabilize"
    }

    fn apply(&self, word: &BraidWord, rng: &mut SeededRng) -> Option<BraidWord> {
        let sign = if rng.random_bool(0.5) {
            Sign::Positive
        } else {
            Sign::Negative
        };
        stabilize(word, sign).ok()
    }
}

struct Destabilize;

impl RewriteMove for Destabilize {
    fn name(&self) -> &'static str {
        "destabilize"
    }

    fn apply(&self, word: &BraidWord, _rng: &mut SeededRng) -> Option<BraidWord> {
        destabilize(word).ok()
    }
}

/// Size limits enforced on every intermediate word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveBounds {
    pub max_length: usize,
    pub max_strands: u8,
}

impl Default for MoveBounds {
    fn default() -> Self {
        Self {
            max_length: MAX_ENCODABLE_LENGTH,
            max_strands: MAX_STRANDS,
        }
    }
}

impl MoveBounds {
    pub fn admits(&self, word: &BraidWord) -> bool {
        word.len() <= self.max_length && word.strands() <= self.max_strands
    }
}

/// Applies `move_count` random moves from the default registry. Moves
/// whose result leaves `bounds` are rejected; after `10 * move_count`
/// attempts the walk stops early.
pub fn random_equivalent(
    word: &BraidWord,
    move_count: usize,
    bounds: MoveBounds,
    seed: u64,
) -> BraidWord {
    let registry = MoveRegistry::default();
    let mut rng = seeded(seed);
    random_equivalent_with(&registry, word, move_count, bounds, &mut rng).0
}

/// As [`random_equivalent`], drawing from `registry` and returning the
/// names of the applied moves in order.
pub fn random_equivalent_with(
    registry: &MoveRegistry,
    word: &BraidWord,
    move_count: usize,
    bounds: MoveBounds,
    rng: &mut SeededRng,
) -> (BraidWord, Vec<&'static str>) {
    let mut current = word.clone();
    let mut log = Vec::with_capacity(move_count);
    if registry.is_empty() {
        return (current, log);
    }
    let mut attempts = 0;
    while log.len() < move_count && attempts < 10 * move_count {
        attempts += 1;
        let (_, mv) = registry.moves.choose(rng).expect("registry is nonempty");
        if let Some(next) = mv.apply(&current, rng) {
            if bounds.admits(&next) {
                current = next;
                log.push(mv.name());
            }
        }
    }
    (current, log)
}
