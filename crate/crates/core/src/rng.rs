//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from ChaCha8 (the
//! `rand_chacha` implementation) seeded with `seed_from_u64(seed)` and
//! switched to an explicit 64-bit stream id. ChaCha is counter based, so each
//! stream is an independent sequence and work can be split across threads by
//! stream id without changing any output. Gaussian samples use Box-Muller on
//! top of it, which keeps results reproducible wherever the same generator
//! is used.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of base seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Pair of independent standard normals by Box-Muller.
#[inline]
pub fn normal_pair<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 - U lies in (0, 1], so the logarithm is finite.
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Circularly-symmetric complex Gaussian `CN(0, 1)`.
#[inline]
pub fn complex_normal<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let (a, b) = normal_pair(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniform index in `0..n` (`n > 0`).
#[inline]
pub fn index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n)
}
