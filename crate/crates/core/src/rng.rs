//! Random streams and the samplers built on them.
//!
//! Every sampler here consumes the underlying stream in a fixed, documented
//! way so that a seed determines a trajectory exactly:
//!
//! * [`uniform`] takes one `u64` and keeps its top 53 bits.
//! * [`standard_normal`] takes two uniforms (Box–Muller, cosine branch only).
//! * [`gamma`] uses Marsaglia–Tsang rejection; [`beta`] is two gammas.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator behind every simulation stream.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a sequence of coordinates into a 64-bit stream seed.
///
/// Each coordinate is folded in separately, so `(base, [p, r])` and
/// `(base, [p, r + 1])` give unrelated streams and adding a coordinate
/// elsewhere never changes existing ones.
pub fn mix_seed(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix64(base), |h, &c| {
        splitmix64(h ^ splitmix64(c.wrapping_mul(GOLDEN).wrapping_add(1)))
    })
}

/// A fresh stream for the given base seed and coordinates.
pub fn stream(base: u64, coords: &[u64]) -> SimRng {
    SimRng::seed_from_u64(mix_seed(base, coords))
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli draw; exactly one uniform is consumed regardless of `p`.
#[inline]
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    uniform(rng) < p
}

/// Standard normal draw via Box–Muller.
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Gamma(shape, 1) draw, Marsaglia–Tsang.
pub fn gamma<R: RngCore + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0, "gamma shape must be positive");
    if shape < 1.0 {
        // Boost: G(a) = G(a + 1) * U^(1/a).
        let g = gamma(rng, shape + 1.0);
        let u = 1.0 - uniform(rng);
        return g * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = uniform(rng);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u > 0.0 && u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Beta(alpha, beta) draw as a ratio of gammas.
pub fn beta<R: RngCore + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let x = gamma(rng, alpha);
    let y = gamma(rng, beta);
    x / (x + y)
}
