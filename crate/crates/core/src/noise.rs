//! Reproducible Gaussian noise.
//!
//! The generator is ChaCha20 (stream 0) keyed with the 64-bit seed in
//! little-endian order followed by 24 zero bytes. Each complex sample takes two
//! consecutive `u64` draws `a, b`, maps them to uniforms `u = (a >> 11) 2^-53`
//! and `v = (b >> 11) 2^-53`, and applies Box-Muller:
//! `re = sqrt(-2 ln(1 - u)) cos(2 pi v)`, `im = sqrt(-2 ln(1 - u)) sin(2 pi v)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub struct NoiseRng {
    inner: ChaCha20Rng,
}

impl NoiseRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        NoiseRng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    /// Uniform sample in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Complex sample with independent standard normal real and imaginary parts.
    pub fn complex_normal(&mut self) -> Complex64 {
        let u = self.uniform();
        let v = self.uniform();
        let radius = (-2.0 * (1.0 - u).ln()).sqrt();
        let (s, c) = (TAU * v).sin_cos();
        Complex64::new(radius * c, radius * s)
    }
}
