//! Seeded random stream used for noise synthesis and sampling-based checks.
//!
//! ChaCha8 (via `rand_chacha`, value-stable across platforms) feeds a
//! Box–Muller transform that uses both outputs of every pair. Changing either
//! piece changes every golden fixture, so treat them as frozen.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SeededStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        // multiply-shift; the bias is < n / 2^64
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Standard normal sample (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], so the log is finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let mut a = SeededStream::new(99);
        let mut b = SeededStream::new(99);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
        let mut c = SeededStream::new(100);
        assert_ne!(SeededStream::new(99).uniform(), c.uniform());
    }

    #[test]
    fn normal_moments() {
        let mut s = SeededStream::new(1);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 / (n as f64).sqrt() * 1.5);
        assert!((var.sqrt() - 1.0).abs() < 0.01);
    }

    #[test]
    fn below_stays_in_range() {
        let mut s = SeededStream::new(4);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let k = s.below(7) as usize;
            seen[k] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }
}
