//! Counter-keyed random streams.
//!
//! Every draw in a game comes from a ChaCha8 stream whose 256-bit key is the
//! little-endian concatenation of `(seed, run, round, purpose)`. Distinct
//! keys give independent streams, so adversary and learner randomness never
//! interleave and each round's fresh hints come from a stream no other round
//! touches. Re-deriving a key always reproduces the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. The tag occupies the high 32 bits of the
/// purpose word; the low 32 bits carry a sub-index (e.g. an expert id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Purpose {
    Adversary,
    AdversarySetup,
    Hints,
    Hallucination,
    TieBreak,
    LearnerSample,
    Verification,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Adversary => 1,
            Purpose::AdversarySetup => 2,
            Purpose::Hints => 3,
            Purpose::Hallucination => 4,
            Purpose::TieBreak => 5,
            Purpose::LearnerSample => 6,
            Purpose::Verification => 7,
        }
    }

    pub fn word(self, sub: u32) -> u64 {
        (self.tag() << 32) | u64::from(sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub run: u64,
    pub round: u64,
    pub purpose: u64,
}

impl StreamKey {
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.run.to_le_bytes());
        key[16..24].copy_from_slice(&self.round.to_le_bytes());
        key[24..32].copy_from_slice(&self.purpose.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

/// Stream factory bound to one `(seed, run)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Streams {
    pub seed: u64,
    pub run: u64,
}

impl Streams {
    pub fn new(seed: u64, run: u64) -> Self {
        Streams { seed, run }
    }

    pub fn key(&self, round: u64, purpose: Purpose, sub: u32) -> StreamKey {
        StreamKey {
            seed: self.seed,
            run: self.run,
            round,
            purpose: purpose.word(sub),
        }
    }

    pub fn rng(&self, round: u64, purpose: Purpose, sub: u32) -> ChaCha8Rng {
        self.key(round, purpose, sub).rng()
    }

    /// Child factory for a nested component (e.g. one expert of a meta
    /// learner). The run word is remixed so children never collide with the
    /// parent's keys.
    pub fn child(&self, index: u64) -> Streams {
        let mixed = splitmix64(self.run ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Streams {
            seed: self.seed,
            run: mixed,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fixed-seed generator for tests and one-off checks.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
