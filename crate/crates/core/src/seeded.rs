//! Crate-internal deterministic randomness.
//!
//! Everything random in this crate flows through ChaCha8 keyed by a `u64`
//! seed (written little-endian into the first 8 key bytes) with the 64-bit
//! stream counter selecting independent substreams.  Bounded draws use
//! rejection so they are exactly uniform; both procedures are part of the
//! reproducibility contract documented on `census::sample_directions`.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn chacha(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from `0..bound`: reject the `2^64 mod bound` smallest raw
/// values so each residue class keeps equal mass.
pub(crate) fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let r = rng.next_u64();
        if r >= threshold {
            return r % bound;
        }
    }
}

/// The first `m` entries of a Fisher–Yates shuffle of `0..n`, sorted
/// ascending: a uniformly random `m`-subset.
pub(crate) fn sample_indices(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    debug_assert!(m <= n && n <= u32::MAX as usize);
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..m {
        let j = i + uniform_below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut out = pool[..m].to_vec();
    out.sort_unstable();
    out
}

/// Uniform `f64` in `[-1, 1)`, used to seed eigenbasis iterations.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 52) as f64 * 2.0 - 1.0
}
