//! Seeded random streams.
//!
//! Every stochastic step draws from its own ChaCha stream keyed by the run
//! seed and a fixed stream id, so adding draws in one step never perturbs
//! another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod stream {
    pub const SPLIT_LABELED: u64 = 1;
    pub const SPLIT_POOL: u64 = 2;
    pub const SPLIT_ANOMALY_SUB: u64 = 3;
    pub const SPLIT_NORMAL_SUB: u64 = 4;
    pub const INIT: u64 = 10;
    pub const WARMUP: u64 = 11;
    pub const PSEUDO: u64 = 12;
    pub const EPISODES: u64 = 13;
    pub const DEEPALL: u64 = 14;
    pub const PARTITION: u64 = 20;
    pub const SYNTH: u64 = 30;
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, used to give each graph or cell its own seed space.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
