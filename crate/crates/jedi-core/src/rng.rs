//! Seeded random streams.
//!
//! Every source of randomness in a run is a ChaCha stream derived from the
//! run seed plus a structural address (component, loop, slot). Streams are
//! independent of evaluation order and worker count, which is what makes
//! runs reproducible under parallelism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Component tags for stream addressing.
pub mod component {
    pub const INIT: u64 = 1;
    pub const TARGETS: u64 = 2;
    pub const EMITTER: u64 = 3;
    pub const VARIATION: u64 = 4;
    pub const RESTART: u64 = 5;
    pub const GP_FIT: u64 = 6;
}

/// Deterministic stream for `(seed, component, loop, slot)`.
pub fn stream(seed: u64, component: u64, loop_index: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((component << 48) ^ (loop_index << 16) ^ slot);
    rng
}

/// Top-level stream for a component that is used sequentially.
pub fn component_stream(seed: u64, component: u64) -> ChaCha8Rng {
    stream(seed, component, 0, 0)
}
