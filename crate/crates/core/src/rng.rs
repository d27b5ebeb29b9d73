//! Deterministic random substreams.
//!
//! Every random quantity in a simulation is drawn from a ChaCha stream whose
//! seed is derived from the master seed and a path of integer tags (purpose,
//! user index, slot, ...). Work items can therefore run in any order, or on
//! any worker, and still produce bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Tags naming the independent purposes a master seed is split into.
pub mod tag {
    pub const USERS: u64 = 1;
    pub const FADING: u64 = 2;
    pub const SUBCARRIER_ORDER: u64 = 3;
    pub const MAPPING: u64 = 4;
    pub const INSTANCE: u64 = 5;
    pub const ALLOCATION: u64 = 6;
    pub const REPORT: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A master seed from which named substreams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree(master)
    }

    pub fn master(&self) -> u64 {
        self.0
    }

    /// Child tree for a tag; children of different tags are independent.
    pub fn child(&self, tag: u64) -> SeedTree {
        SeedTree(splitmix64(self.0 ^ splitmix64(tag.wrapping_add(0xA076_1D64_78BD_642F))))
    }

    /// Child tree reached by following a path of tags.
    pub fn path(&self, tags: &[u64]) -> SeedTree {
        tags.iter().fold(*self, |t, &x| t.child(x))
    }

    /// Random stream for this node.
    pub fn rng(&self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Shorthand for `self.path(tags).rng()`.
    pub fn stream(&self, tags: &[u64]) -> SimRng {
        self.path(tags).rng()
    }
}
