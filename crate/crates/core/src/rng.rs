//! Deterministic random-stream derivation.
//!
//! All stochastic code in this workspace draws from ChaCha streams whose
//! seeds are derived from a single master seed and a purpose path, so that
//! results are bit-reproducible and independent of thread scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 step; used only for seed mixing, not for sampling.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a purpose path.
///
/// Distinct paths give statistically independent streams; the same path
/// always gives the same seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut out = splitmix64(&mut state);
    for &p in path {
        state ^= p.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        out ^= splitmix64(&mut state);
    }
    out
}

/// Stream purpose tags for top-level experiment plumbing.
pub mod purpose {
    pub const ARMA: u64 = 0x01;
    pub const OUTCOMES: u64 = 0x02;
    pub const CONDITIONAL: u64 = 0x03;
    pub const POLLUTE: u64 = 0x04;
    pub const CENSOR: u64 = 0x05;
    pub const TREE: u64 = 0x06;
    pub const ORACLE: u64 = 0x07;
    pub const QUERY: u64 = 0x08;
    pub const VALIDATION: u64 = 0x09;
    pub const ERM: u64 = 0x0a;
}

/// Builds the ChaCha generator for a derived seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(master, path))`.
pub fn stream(master: u64, path: &[u64]) -> ChaCha12Rng {
    rng_from_seed(derive_seed(master, path))
}
