//! Deterministic RNG stream derivation for parallel Monte Carlo.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master_seed, purpose, sample_index)`. The purpose tag separates uses
//! (matrix sampling, probe frames, observables, scan pairs) so adding a
//! consumer never shifts another's stream, and the sample index selects an
//! independent ChaCha stream on the same key. Workers can therefore process
//! any subset of indices in any order and reproduce identical samples.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derive the ChaCha8 stream for one purpose and sample.
///
/// The 32-byte key is a splitmix64 chain over the master seed xor the
/// purpose hash; the sample index is the ChaCha stream id. Distinct
/// purposes get unrelated keys, distinct indices get independent streams.
pub fn stream_rng(master_seed: u64, purpose: &str, sample_index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ fnv1a(purpose.as_bytes());
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample_index);
    rng
}
