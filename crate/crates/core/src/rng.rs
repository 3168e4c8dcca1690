//! Counter-based deterministic noise streams.
//!
//! A [`NoiseDraw`] is a key derived from `(seed, image_index, replication_index)`.
//! Value number `i` of a stream is a pure function of the key and `i`, so any
//! component can be drawn in any order or on any thread with the same result.
//!
//! The mixing function is the SplitMix64 finalizer. Gaussian variates use the
//! inverse normal CDF of a single uniform in the open interval `(0, 1)`.

use statrs::distribution::{ContinuousCDF, Normal};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(key: u64, word: u64) -> u64 {
    mix64(key.wrapping_add(GOLDEN_GAMMA) ^ mix64(word.wrapping_add(GOLDEN_GAMMA)))
}

/// Derives an independent 64-bit seed from a parent seed and a tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    absorb(mix64(seed), tag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseDraw {
    key: u64,
}

impl NoiseDraw {
    pub fn new(seed: u64, image_index: u64, replication_index: u64) -> Self {
        let key = absorb(absorb(mix64(seed), image_index), replication_index);
        Self { key }
    }

    /// Raw 64-bit value at `counter`.
    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform in the open interval `(0, 1)`.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        ((self.bits(counter) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform_range(&self, counter: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform(counter)
    }

    #[inline]
    pub fn bernoulli(&self, counter: u64, p: f64) -> bool {
        self.uniform(counter) < p
    }

    /// Standard normal variate at `counter`.
    #[inline]
    pub fn standard_normal(&self, counter: u64) -> f64 {
        standard_normal().inverse_cdf(self.uniform(counter))
    }

    /// `N(0, sigma)`; exactly zero when `sigma == 0`.
    #[inline]
    pub fn gaussian(&self, counter: u64, sigma: f64) -> f64 {
        if sigma == 0.0 {
            0.0
        } else {
            sigma * self.standard_normal(counter)
        }
    }
}

fn standard_normal() -> &'static Normal {
    static N: std::sync::OnceLock<Normal> = std::sync::OnceLock::new();
    N.get_or_init(Normal::standard)
}
