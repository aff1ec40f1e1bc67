//! Deterministic random substreams for all stochastic work.
//!
//! Every consumer derives its own stream from a master seed plus a
//! (population index, trait index, purpose) identity. Identical inputs give
//! identical sequences on every platform and thread schedule, so parallel and
//! serial runs agree bitwise; decorrelation between streams comes from the
//! derivation, not from locking.
//!
//! The generator is xoshiro256++ (period 2^256 - 1), seeded through a
//! splitmix64 absorb-and-expand of the identity words. Gaussian deviates use
//! the basic Box-Muller transform with the sin branch cached.

use std::f64::consts::TAU;

/// What a derived stream is used for; part of the stream identity, so the
/// same (seed, population, trait) triple can serve several purposes without
/// correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Bootstrap = 0,
    Simulate = 1,
    ScalingStudy = 2,
    Calibration = 3,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

// splitmix64 finalizer; doubles as the avalanche mixer for stream derivation.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Source of Gaussian deviates. Lets tests substitute a scripted double for
/// the real stream.
pub trait GaussianSource {
    fn next_gaussian(&mut self, mean: f64, sd: f64) -> f64;
}

/// A seedable random stream: uniforms strictly inside (0, 1), uniform
/// integers, and Box-Muller Gaussians.
#[derive(Debug, Clone)]
pub struct RandomStream {
    state: [u64; 4],
    cached_gaussian: Option<f64>,
}

/// Derives a decorrelated stream for the given identity. `trait_index` is
/// `None` for population-level draws (mixed as a distinct word, so the
/// population-level stream never collides with any per-trait stream).
pub fn derive_stream(
    master_seed: u64,
    pop_index: usize,
    trait_index: Option<usize>,
    purpose: StreamPurpose,
) -> RandomStream {
    let trait_word = match trait_index {
        None => 0,
        Some(t) => t as u64 + 1,
    };
    let mut acc = master_seed;
    for word in [pop_index as u64, trait_word, purpose as u64] {
        acc = mix64(acc.wrapping_add(GOLDEN).wrapping_add(word));
    }
    let mut state = [0u64; 4];
    for s in &mut state {
        acc = acc.wrapping_add(GOLDEN);
        *s = mix64(acc);
    }
    RandomStream {
        state,
        cached_gaussian: None,
    }
}

impl RandomStream {
    fn next_u64(&mut self) -> u64 {
        let [s0, s1, s2, s3] = self.state;
        let result = (s0.wrapping_add(s3)).rotate_left(23).wrapping_add(s0);
        let t = s1 << 17;
        let mut s = [s0, s1, s2, s3];
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        self.state = s;
        result
    }

    /// Uniform deviate strictly inside (0, 1): the 53-bit mantissa offset by
    /// half a step, so neither endpoint is reachable.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in `[lo, hi]`, both ends inclusive.
    pub fn next_int_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        let span = u64::from(hi - lo) + 1;
        // modulo bias is below span / 2^64, irrelevant at these ranges
        lo + (self.next_u64() % span) as u32
    }
}

impl GaussianSource for RandomStream {
    /// Basic Box-Muller: draws u1 then u2, returns the cosine branch first
    /// and caches the sine branch (as a unit deviate) for the next call.
    fn next_gaussian(&mut self, mean: f64, sd: f64) -> f64 {
        assert!(sd > 0.0, "standard deviation must be positive, got {sd}");
        let z = match self.cached_gaussian.take() {
            Some(z) => z,
            None => {
                let u1 = self.next_uniform();
                let u2 = self.next_uniform();
                let r = (-2.0 * u1.ln()).sqrt();
                let (sin, cos) = (TAU * u2).sin_cos();
                self.cached_gaussian = Some(r * sin);
                r * cos
            }
        };
        mean + sd * z
    }
}
