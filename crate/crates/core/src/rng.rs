//! Seeded random streams.
//!
//! A stream is ChaCha20 keyed by the 64-bit seed. Sub-streams share the key and use
//! ChaCha's 64-bit stream selector, so `substream(k)` is a pure function of
//! `(seed, k)` and distinct sub-streams never overlap.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::numeric::norm_quantile;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream number `index` derived from this stream's seed.
    pub fn substream(&self, index: u64) -> RngStream {
        let mut inner = ChaCha20Rng::seed_from_u64(self.seed);
        inner.set_stream(index.wrapping_add(1));
        RngStream {
            seed: self.seed,
            inner,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Standard normal draw by inversion.
    pub fn normal(&mut self) -> f64 {
        norm_quantile(self.uniform())
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::chi2_sf;

    #[test]
    fn reproducible_and_substreams_differ() {
        let mut a = RngStream::new(7);
        let mut b = RngStream::new(7);
        let xa: Vec<f64> = (0..10).map(|_| a.uniform()).collect();
        let xb: Vec<f64> = (0..10).map(|_| b.uniform()).collect();
        assert_eq!(xa, xb);
        let mut s1 = a.substream(1);
        let mut s2 = a.substream(2);
        assert_ne!(s1.next_u64(), s2.next_u64());
        let mut s1b = RngStream::new(7).substream(1);
        let mut s1c = a.substream(1);
        assert_eq!(s1b.next_u64(), s1c.next_u64());
    }

    #[test]
    fn uniform_frequency_chi_square() {
        let mut rng = RngStream::new(2024);
        let n = 1_000_000;
        let mut counts = [0usize; 100];
        for _ in 0..n {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
            counts[(u * 100.0) as usize] += 1;
        }
        let expected = n as f64 / 100.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2_sf(stat, 99.0) > 0.01, "chi2 = {stat}");
    }
}
