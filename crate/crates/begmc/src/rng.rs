//! Seeded, splittable random-number streams.
//!
//! One counter-based generator (ChaCha8) underlies every simulation. Streams
//! are addressed: a component (replica index, experiment cell, phase) gets a
//! ChaCha stream id, and within a stream the word position can be set from a
//! sweep counter. Identical seeds therefore give identical trajectories, and
//! independent components can draw in parallel without coordination.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for the swap phase of the swapping chain.
pub const SWAP_STREAM: u64 = u64::MAX;
/// Stream id reserved for single-chain (Metropolis) trajectories.
pub const SINGLE_STREAM: u64 = 0;

/// Words reserved per (sweep, slot) so positions never collide.
const WORDS_PER_SLOT: u128 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root generator for a (seed, label) pair. Used for experiment cells and
/// free-running trajectories.
pub fn stream_rng(seed: u64, label: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut st = splitmix(seed ^ splitmix(label));
    for chunk in key.chunks_mut(8) {
        st = splitmix(st);
        chunk.copy_from_slice(&st.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Generator for replica `replica` at sweep `sweep`: same key for every
/// component of a run, distinct ChaCha stream per replica, word position
/// derived from the sweep counter. At most [`WORDS_PER_SLOT`] 64-bit words
/// may be drawn per (replica, sweep) slot.
pub fn replica_stream(seed: u64, replica: u64, sweep: u64) -> ChaCha8Rng {
    let mut rng = stream_rng(seed, 0x5eed);
    rng.set_stream(replica);
    rng.set_word_pos(sweep as u128 * 2 * WORDS_PER_SLOT);
    rng
}

/// Uniform u64 in [0, k) via the 128-bit multiply trick. The modulo bias is
/// at most k / 2^64, far below every tolerance in this crate, and the draw
/// consumes exactly one word.
#[inline]
pub fn uniform_index<R: RngCore>(rng: &mut R, k: usize) -> usize {
    debug_assert!(k > 0);
    let x = rng.next_u64() as u128;
    ((x * k as u128) >> 64) as usize
}

/// Uniform f64 in [0, 1) from one word.
#[inline]
pub fn uniform_unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
