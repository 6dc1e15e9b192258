//! Counter-based pseudo-random streams.
//!
//! Perturbation draws are pure functions of (seed, sample, site) so Monte
//! Carlo samples can be evaluated in any order, or in parallel, without
//! changing the result.

pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a chain of words into one well-mixed word.
pub fn mix(words: &[u64]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3; // arbitrary nonzero start
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// Map a hash to [0, 1).
pub fn unit(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in [-1, 1).
pub fn symmetric_unit(h: u64) -> f64 {
    2.0 * unit(h) - 1.0
}
