//! Seeded random streams.
//!
//! Every stochastic stage draws from its own `ChaCha8Rng`, seeded from a
//! 64-bit value. Seeds for nested stages are derived by hashing the parent
//! seed with a sequence of integer keys, so results do not depend on the
//! order in which stages run.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

pub fn stream(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and an ordered list of keys.
pub fn derive_seed(parent: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix(parent ^ 0x9e37_79b9_7f4a_7c15), |acc, &k| {
        mix(acc.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix(k))
    })
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
///
/// Consumes exactly two standard normals, real part first.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}
