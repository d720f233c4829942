//! Deterministic seed derivation.
//!
//! Every random consumer (noise, trade-off parameter, environment draws, ...)
//! gets its own ChaCha stream derived from a master seed plus a list of
//! labels. Splitting is stateless, so campaign repetitions can be dispatched
//! to any thread without changing the draws each repetition sees.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The RNG used throughout the crate.
pub type StreamRng = ChaCha12Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a sequence of stream labels into a child seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ 0x6c62_272e_07bb_0142);
    for &label in labels {
        s = splitmix64(s ^ splitmix64(label));
    }
    s
}

/// Deterministic RNG for one consumer stream.
pub fn stream_rng(master: u64, labels: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, labels))
}
