//! Self-contained deterministic random number generation.
//!
//! Everything downstream (embedding init, negative sampling, shuffles,
//! train/test splits) must reproduce bit-identically from a seed, across
//! platforms and dependency upgrades, so the generator is pinned here
//! rather than pulled from an external crate: xoshiro256++ state seeded
//! through SplitMix64.

use crate::math;
use alloc::vec::Vec;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 stepper, used to expand a single `u64` seed into generator state.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}

/// xoshiro256++ generator with a cached Box-Muller spare for normal draws.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Self {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
            spare_normal: None,
        }
    }

    /// Derives an independent generator for a named substream (epoch index,
    /// split stage, ...) without consuming state from the parent seed.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self::new(seed ^ stream.wrapping_mul(GOLDEN_GAMMA).rotate_left(17))
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). The modulo bias is below n / 2^64.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal draw via Box-Muller; pairs are generated together and
    /// the second value cached.
    pub fn next_standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log argument strictly positive.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let radius = math::sqrt(-2.0 * math::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(radius * math::sin(theta));
        radius * math::cos(theta)
    }

    pub fn next_normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.next_standard_normal()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i + 1);
            xs.swap(i, j);
        }
    }

    /// Draws `count` values into a fresh vector; convenience for tests.
    pub fn sample_normals(&mut self, count: usize, mean: f64, std_dev: f64) -> Vec<f64> {
        (0..count).map(|_| self.next_normal(mean, std_dev)).collect()
    }
}
