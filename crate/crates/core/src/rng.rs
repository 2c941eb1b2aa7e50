//! Seeded random streams.
//!
//! Every consumer draws from a ChaCha8 generator seeded with the user seed
//! and switched to its own stream number, so components (and individual
//! evaluation episodes) never share a sequence and can run in any order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

pub type StreamRng = ChaCha8Rng;

/// Stream used by the belief-set random walk.
pub const SAMPLER_STREAM: u64 = 1;
/// Stream used when subsampling a belief set.
pub const SUBSAMPLE_STREAM: u64 = 2;
/// Stream used by the solver's belief selection.
pub const SOLVER_STREAM: u64 = 3;
/// Evaluation episode `e` uses stream `EPISODE_STREAM_BASE + e`.
pub const EPISODE_STREAM_BASE: u64 = 1 << 32;

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: RngSeed, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(stream);
    rng
}

/// Draws an index from `(index, probability)` pairs.
///
/// Falls back to the last entry when rounding leaves the cumulative sum
/// just below the uniform draw.
pub fn sample_sparse<R: Rng + ?Sized>(entries: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for &(i, p) in entries {
        acc += p;
        if u < acc {
            return i;
        }
    }
    entries.last().expect("non-empty distribution").0
}

/// Draws an index from a dense probability vector.
pub fn sample_dense<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}
