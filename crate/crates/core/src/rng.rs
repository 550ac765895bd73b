//! Named random streams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent consumers of randomness. Each maps to its own ChaCha stream so
/// that e.g. changing the replay sampler never perturbs the request sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Requests = 1,
    Init = 2,
    Noise = 3,
    Replay = 4,
    Policy = 5,
    Eval = 6,
}

pub fn stream_rng(root_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(stream as u64);
    rng
}

/// A child seed for a sub-component (e.g. one agent's init within the init stream).
pub fn derive_seed(root_seed: u64, stream: Stream, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream as u64 + 16);
    rand::Rng::random(&mut rng)
}
