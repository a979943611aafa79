use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

pub type TrajectoryRng = ChaCha8Rng;

/// Complex Wiener increment `(xi_1 + i xi_2) sqrt(dt/2)`:
/// `E|dW|^2 = dt`, `E dW^2 = 0`.
pub fn complex_wiener<T: Real, R: Rng + ?Sized>(rng: &mut R, dt: T) -> Complex<T> {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    let s = (dt * T::half()).sqrt();
    Complex::new(T::lit(a) * s, T::lit(b) * s)
}

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trajectory seed; depends only on `(master, index)`.
pub fn trajectory_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn trajectory_rng(seed: u64) -> TrajectoryRng {
    ChaCha8Rng::seed_from_u64(seed)
}
