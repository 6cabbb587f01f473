//! Seedable, splittable random streams.
//!
//! Every stochastic routine in the crate takes a `(seed, stream)` pair and
//! derives an independent ChaCha8 stream from it, so replicas and Monte
//! Carlo shards can run in parallel while outputs stay byte-identical for a
//! given seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Root stream for a run.
pub fn root(seed: u64) -> Rng {
    stream(seed, 0)
}

/// Independent stream `idx` of the run seeded by `seed`.
///
/// ChaCha exposes a 64-bit stream selector; distinct `(seed, idx)` pairs
/// yield non-overlapping sequences.
pub fn stream(seed: u64, idx: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx);
    rng
}
