//! Hierarchical, splittable random streams.
//!
//! A stream is identified by a master seed and a path of indices
//! (experiment → size → replica → row). The path is folded into a 64-bit key
//! with the SplitMix64 finalizer:
//!
//! ```text
//! key₀      = splitmix64(seed)
//! key_{i+1} = splitmix64(key_i ^ splitmix64(index_i + 0x9E3779B97F4A7C15))
//! ```
//!
//! and the key seeds a ChaCha8 generator. Identical `(seed, path)` pairs give
//! identical draws no matter which thread consumes them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds one path component into a stream key.
pub fn mix(key: u64, index: u64) -> u64 {
    splitmix64(key ^ splitmix64(index.wrapping_add(GOLDEN_GAMMA)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    key: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: Vec::new(),
            key: splitmix64(seed),
        }
    }

    /// The substream one level below this one.
    pub fn child(&self, index: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Self {
            seed: self.seed,
            path,
            key: mix(self.key, index),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}
