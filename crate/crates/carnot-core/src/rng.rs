//! Deterministic seeded RNG streams.
//!
//! Every randomized routine takes an explicit `u64` seed; independent
//! substreams (per rung, per cloud) are split off with ChaCha stream ids so
//! results never depend on evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw in [-half, half].
#[inline]
pub(crate) fn symmetric(rng: &mut ChaCha8Rng, half: f64) -> f64 {
    (rng.random::<f64>() * 2.0 - 1.0) * half
}
