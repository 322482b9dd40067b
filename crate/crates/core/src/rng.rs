//! Deterministic pseudo-random source.
//!
//! Every randomized operation in the crate draws from [`ShiftRng`], a
//! xorshift64* generator (shifts 12, 25, 27; output multiplier
//! `0x2545_F491_4F6C_DD1D`). Seeds are expanded through one SplitMix64 step
//! so that small seeds such as `0` and `1` give unrelated, non-zero states.
//! The stream for a given seed is fixed and must not change between releases:
//! transcripts, secrets and experiment reports are reproduced from it.

use num_bigint::BigUint;

const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULT: u64 = 0x2545_F491_4F6C_DD1D;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SPLITMIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftRng {
    state: u64,
}

impl ShiftRng {
    pub fn new(seed: u64) -> Self {
        let state = splitmix64(seed);
        ShiftRng {
            state: if state == 0 { SPLITMIX_GAMMA } else { state },
        }
    }

    /// Independent stream for the `index`-th job of a seeded batch. Workers
    /// derive their generator from `(seed, index)` alone, so results do not
    /// depend on scheduling.
    pub fn substream(seed: u64, index: u64) -> Self {
        ShiftRng::new(splitmix64(seed) ^ splitmix64(index.wrapping_mul(SPLITMIX_GAMMA) ^ 0x5555))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULT)
    }

    /// Uniform integer in `0..bound` by rejection; `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    pub fn below_usize(&mut self, bound: usize) -> usize {
        self.below(bound as u64) as usize
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform big integer in `0..bound` by masked rejection.
    pub fn below_big(&mut self, bound: &BigUint) -> BigUint {
        assert!(bound.bits() > 0, "below_big(0)");
        if let Some(small) = u64::try_from(bound).ok() {
            return BigUint::from(self.below(small));
        }
        let bits = bound.bits();
        let words = bits.div_ceil(64) as usize;
        let top_bits = bits - 64 * (words as u64 - 1);
        let top_mask = if top_bits == 64 { u64::MAX } else { (1u64 << top_bits) - 1 };
        loop {
            let mut digits: Vec<u64> = (0..words).map(|_| self.next_u64()).collect();
            digits[words - 1] &= top_mask;
            let v = BigUint::from_slice(
                &digits
                    .iter()
                    .flat_map(|d| [*d as u32, (*d >> 32) as u32])
                    .collect::<Vec<_>>(),
            );
            if &v < bound {
                return v;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below_usize(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_pinned() {
        let mut rng = ShiftRng::new(42);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = ShiftRng::new(42);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_ne!(ShiftRng::new(0).next_u64(), ShiftRng::new(1).next_u64());
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = ShiftRng::new(7);
        let mut hits = [0usize; 5];
        for _ in 0..10_000 {
            hits[rng.below_usize(5)] += 1;
        }
        assert!(hits.iter().all(|&h| (1_800..2_200).contains(&h)), "{hits:?}");
    }

    #[test]
    fn below_big_is_bounded() {
        let mut rng = ShiftRng::new(3);
        let bound = BigUint::from(10u32).pow(30) + 7u32;
        for _ in 0..200 {
            assert!(rng.below_big(&bound) < bound);
        }
    }

    #[test]
    fn substreams_differ() {
        let a = ShiftRng::substream(9, 0).next_u64();
        let b = ShiftRng::substream(9, 1).next_u64();
        assert_ne!(a, b);
    }
}
