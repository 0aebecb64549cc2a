//! Deterministic seed streams.
//!
//! Every random draw in the crate comes from a generator derived from a
//! master seed plus a short list of integer tags (domain, point index, trial
//! index, ...). Derivation is a pure function of its inputs, so a trial's
//! randomness does not depend on which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Stream domains. Keeping them distinct means the constellation, noise and
/// message draws never share a generator.
pub mod domain {
    pub const CONSTELLATION: u64 = 0x636f_6e73;
    pub const TRIAL: u64 = 0x7472_6961;
    pub const PILOT: u64 = 0x7069_6c6f;
    pub const PERMUTATION: u64 = 0x7065_726d;
    pub const CAPACITY: u64 = 0x6361_7061;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed and tags into a single 64-bit seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &tag in tags {
        state ^= tag.wrapping_mul(0xd6e8_feb8_6659_fd93);
        acc ^= splitmix64(&mut state);
        state = acc;
    }
    acc
}

/// Builds a generator for `(master, tags...)`.
pub fn stream(master: u64, tags: &[u64]) -> SimRng {
    let mut state = derive_seed(master, tags);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    SimRng::from_seed(seed)
}
