//! Hierarchical seed splitting.
//!
//! Every random choice in the crate is driven by a `u64` seed. Child seeds are
//! derived from a parent seed and a stream identifier so that independent
//! consumers (sampling levels, Monte Carlo trials, noise) never share a stream
//! and results stay reproducible regardless of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers used by the crate itself.
pub mod stream {
    pub const SCHEME: u64 = 0x5343_4845_4d45;
    pub const NOISE: u64 = 0x4e4f_4953_45;
    pub const SOLVER: u64 = 0x534f_4c56_4552;
    pub const OPERATOR: u64 = 0x4f50_4552;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of child stream `stream` of `parent`.
pub fn derive(parent: u64, stream: u64) -> u64 {
    splitmix(splitmix(parent) ^ splitmix(stream.wrapping_add(0x632b_e59b_d9b4_e019)))
}

/// Derives a child seed from a textual label (FNV-1a hashed).
pub fn derive_label(parent: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    derive(parent, h)
}

/// The generator used throughout the crate.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
