use rand::{CryptoRng, Rng, RngCore};

use super::{reduce_centered, RingElement};

/// Ring element distributions used by the lattice scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Each coefficient uniform in `Z_h`.
    UniformH,
    /// Each coefficient uniform in `{-1, 0, 1}`.
    Ternary,
    /// Discrete Gaussian with the parameter set's σ, truncated to `[-B, B]`.
    Gaussian,
}

/// Cumulative distribution table for a discrete Gaussian truncated to `[-B, B]`.
///
/// Thresholds are fixed-point fractions of `2^64`; a single 64-bit draw picks
/// the output by binary search. Not constant time.
#[derive(Debug, Clone)]
pub struct GaussianTable {
    sigma: f64,
    bound: u32,
    thresholds: Vec<u64>,
}

impl GaussianTable {
    pub fn new(sigma: f64, bound: u32) -> Self {
        let b = bound as i64;
        let weights: Vec<f64> = (-b..=b).map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp()).collect();
        let total: f64 = weights.iter().sum();
        let scale = 2f64.powi(64);
        let mut acc = 0.0;
        let mut thresholds = Vec::with_capacity(weights.len());
        for w in &weights {
            acc += w / total;
            // `as` saturates, so the final entry is u64::MAX
            thresholds.push((acc * scale) as u64);
        }
        if let Some(last) = thresholds.last_mut() {
            *last = u64::MAX;
        }
        Self { sigma, bound, thresholds }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        let r = rng.next_u64();
        let idx = self.thresholds.partition_point(|&c| c < r).min(self.thresholds.len() - 1);
        idx as i64 - self.bound as i64
    }
}

pub(super) fn uniform<R: RngCore + CryptoRng>(d: usize, h: u64, rng: &mut R) -> RingElement {
    let coeffs = (0..d).map(|_| reduce_centered(rng.gen_range(0..h) as i128, h)).collect();
    RingElement { coeffs, modulus: h }
}

pub(super) fn ternary<R: RngCore + CryptoRng>(d: usize, h: u64, rng: &mut R) -> RingElement {
    let coeffs = (0..d).map(|_| rng.gen_range(-1i64..=1)).collect();
    RingElement { coeffs, modulus: h }
}

pub(super) fn gaussian<R: RngCore + CryptoRng>(
    table: &GaussianTable,
    d: usize,
    h: u64,
    rng: &mut R,
) -> RingElement {
    let coeffs = (0..d).map(|_| table.draw(rng)).collect();
    RingElement { coeffs, modulus: h }
}
