//! Seeded random streams.
//!
//! Every stream is a ChaCha20 generator, which is counter based: the 256-bit
//! key selects the generator and a separate 64-bit stream id selects one of
//! 2^64 independent keystreams under that key. A stream is addressed by the
//! triple `(seed, index, role)`:
//!
//! * the key is the 32 bytes produced by four SplitMix64 steps started at `seed`;
//! * the stream id is `mix64(mix64(index) ^ role)`.
//!
//! Two streams that differ in any coordinate of the triple never share
//! keystream blocks, and no stream depends on how many values another stream
//! has consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Stream = ChaCha20Rng;

/// Role tags used to address substreams.
pub mod role {
    pub const MATRIX: u64 = 0x01;
    pub const SPECTRUM: u64 = 0x02;
    pub const RHS: u64 = 0x03;
    pub const PROBLEM: u64 = 0x10;
    pub const REFERENCE_POINT: u64 = 0x11;
    pub const INIT: u64 = 0x12;
    pub const ORACLE: u64 = 0x13;
    pub const DIRECTION: u64 = 0x20;
    pub const NOISE: u64 = 0x21;
    pub const POINT_HASH: u64 = 0x22;
    pub const INIT_OFFSET: u64 = 0x23;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key_from_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    key
}

/// Stream id for `(index, role)` under a given key.
pub fn stream_id(index: u64, role: u64) -> u64 {
    mix64(mix64(index.wrapping_add(GOLDEN)) ^ role)
}

/// Opens the keystream addressed by `(seed, index, role)`.
pub fn stream(seed: u64, index: u64, role: u64) -> Stream {
    let mut rng = ChaCha20Rng::from_seed(key_from_seed(seed));
    rng.set_stream(stream_id(index, role));
    rng
}

/// Derives a 64-bit child seed for `(index, role)` from a parent seed.
pub fn derive_seed(seed: u64, index: u64, role: u64) -> u64 {
    mix64(seed ^ mix64(stream_id(index, role)))
}
