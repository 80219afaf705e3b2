use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A labeled instance `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: usize,
    pub y: f64,
}

impl LabeledExample {
    pub fn new(x: usize, y: f64) -> Self {
        LabeledExample { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    x: usize,
    y_bits: u64,
}

impl Key {
    fn of(x: usize, y: f64) -> Self {
        // -0.0 and 0.0 are the same label
        let y = if y == 0.0 { 0.0 } else { y };
        Key {
            x,
            y_bits: y.to_bits(),
        }
    }
}

/// Multiset of labeled examples stored as `(example, count)` pairs.
///
/// `logical_len` is the multiset size (sum of counts) and is what oracle
/// input-length accounting charges.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExampleMultiset {
    entries: BTreeMap<Key, u64>,
    logical_len: u64,
}

impl ExampleMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_examples<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        let mut s = Self::new();
        for e in iter {
            s.insert(e, 1);
        }
        s
    }

    /// Adds `count` copies of `example`. A zero count is a no-op.
    pub fn insert(&mut self, example: LabeledExample, count: u64) {
        if count == 0 {
            return;
        }
        *self
            .entries
            .entry(Key::of(example.x, example.y))
            .or_insert(0) += count;
        self.logical_len += count;
    }

    pub fn push(&mut self, x: usize, y: f64) {
        self.insert(LabeledExample::new(x, y), 1);
    }

    /// Multiset union (counts add).
    pub fn extend_from(&mut self, other: &ExampleMultiset) {
        for (e, c) in other.iter() {
            self.insert(e, c);
        }
    }

    pub fn union(&self, other: &ExampleMultiset) -> ExampleMultiset {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn logical_len(&self) -> u64 {
        self.logical_len
    }

    /// Number of distinct `(x, y)` pairs.
    pub fn distinct_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (LabeledExample, u64)> + '_ {
        self.entries
            .iter()
            .map(|(k, &c)| (LabeledExample::new(k.x, f64::from_bits(k.y_bits)), c))
    }

    pub fn count_of(&self, x: usize, y: f64) -> u64 {
        self.entries.get(&Key::of(x, y)).copied().unwrap_or(0)
    }
}

impl FromIterator<LabeledExample> for ExampleMultiset {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        ExampleMultiset::from_examples(iter)
    }
}
