//! Seeded, splittable random streams.
//!
//! Every stochastic computation takes a [`Stream`] explicitly. Parallel work
//! derives one independent substream per chunk from the master seed with
//! [`substream`], so results depend only on the seed and the chunk layout.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Stream = ChaCha20Rng;

/// Algorithm identifier recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha20";

pub fn stream(seed: u64) -> Stream {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent substream `index` of the master `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
