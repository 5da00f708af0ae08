//! Seeded random streams. Every consumer derives its generator from an
//! explicit seed; there is no global generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the open interval (0, 1).
pub fn uniform_open(rng: &mut Stream) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}
