//! Seeded random streams.
//!
//! Every replicate draws from its own ChaCha stream selected by index, so
//! results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for stream `stream` of base seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for replicate `rep` within group `group`.
pub fn stream_index(group: u64, rep: u64) -> u64 {
    (group << 32) | (rep & 0xffff_ffff)
}
