//! Seeded pseudorandom stream shared by fold assignment and SMOTE.
//!
//! The generator is SplitMix64. Every consumer draws from it through the
//! three primitives below, so another implementation can reproduce a run
//! bit for bit:
//!
//! ```text
//! next_u64:  state = state + 0x9E3779B97F4A7C15 (wrapping)
//!            z = state
//!            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!            return z ^ (z >> 31)
//! next_f64:  (next_u64 >> 11) * 2^-53                  uniform in [0, 1)
//! below(n):  Lemire multiply-shift with rejection     uniform in [0, n)
//!            m = next_u64 * n (128-bit); lo = m mod 2^64
//!            if lo < n: t = (2^64 - n) mod n; redraw while lo < t
//!            return m >> 64
//! derive(seed, stream) = mix(seed + (stream + 1) * 0x9E3779B97F4A7C15)
//!            where mix is the output function of next_u64
//! shuffle:   Fisher-Yates, i from len-1 down to 1, j = below(i + 1)
//! ```

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Seed for an independent sub-stream, e.g. one SMOTE run or one fold.
    pub fn derive(seed: u64, stream: u64) -> u64 {
        mix(seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw from `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut lo = m as u64;
        if lo < n {
            let threshold = n.wrapping_neg() % n;
            while lo < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                lo = m as u64;
            }
        }
        (m >> 64) as u64
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
