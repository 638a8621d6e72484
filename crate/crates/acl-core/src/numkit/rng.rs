//! Seeded random stream with a platform-stable draw sequence.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Deterministic random stream.
///
/// Backed by ChaCha8, whose output is defined by the algorithm rather than
/// platform specifics: the same seed yields the same sequence everywhere.
/// The word position is exposed so training state can be serialized and
/// resumed bit-exactly.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Restore a stream previously captured with [`RngStream::word_pos`].
    pub fn restore(seed: u64, word_pos: u128) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(word_pos);
        RngStream { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased uniform integer in [0, bound) via rejection sampling.
    pub fn next_below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "next_below bound must be positive");
        let bound = bound as u64;
        let span = 1u128 << 64;
        let limit = span - span % bound as u128;
        loop {
            let v = self.next_u64();
            if (v as u128) < limit {
                return (v % bound) as usize;
            }
        }
    }

    /// Standard normal draw (Box-Muller, two uniforms per draw).
    pub fn next_gaussian(&mut self) -> f64 {
        // next_f64 is in [0, 1); flip to (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
