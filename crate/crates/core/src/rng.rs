//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, tag, index)`: the seed and tag pick a
//! ChaCha key, the index picks the ChaCha stream. Streams are independent of
//! the order in which replicates are scheduled.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Stream `index` of the master `seed`.
    pub fn new(seed: u64, index: u64) -> Self {
        Self::derived(seed, 0, index)
    }

    /// Stream `index` of an independent family selected by `tag`.
    pub fn derived(seed: u64, tag: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        let mut z = seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d));
        for chunk in key.chunks_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Exponential with the given rate; infinite for rate zero.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        // 1 - U lies in (0, 1], so the log is finite.
        -(1.0 - self.uniform()).ln() / rate
    }

    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        use rand_distr::{Distribution, Poisson};
        let dist = Poisson::new(mean).expect("positive finite mean");
        dist.sample(&mut self.rng) as u64
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Index drawn with probability proportional to `weights`.
    pub fn weighted_index(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut x = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                return i;
            }
            x -= w;
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| RandomStream::new(7, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut s0 = RandomStream::new(7, 0);
        let mut s1 = RandomStream::new(7, 1);
        let mut t0 = RandomStream::derived(7, 1, 0);
        let x = s0.next_u64();
        assert_ne!(x, s1.next_u64());
        assert_ne!(x, t0.next_u64());
        assert_ne!(RandomStream::new(8, 0).next_u64(), x);
    }

    #[test]
    fn exponential_mean() {
        let mut s = RandomStream::new(1, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| s.exponential(4.0)).sum::<f64>() / n as f64;
        // sd of the mean is 0.25 / sqrt(n) ~ 5.6e-4
        assert!((mean - 0.25).abs() < 0.003, "{mean}");
        assert_eq!(s.exponential(0.0), f64::INFINITY);
    }

    #[test]
    fn weighted_index_frequencies() {
        let mut s = RandomStream::new(2, 0);
        let n = 100_000;
        let hits = (0..n).filter(|_| s.weighted_index(&[1.0, 3.0]) == 1).count();
        let p = hits as f64 / n as f64;
        assert!((p - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / n as f64).sqrt(), "{p}");
    }
}
