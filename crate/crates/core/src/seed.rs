//! Deterministic random streams shared with other implementations.
//!
//! Every random quantity in the toolkit comes from ChaCha20 (the
//! `rand_chacha::ChaCha20Rng` stream) keyed with `seed_from_u64`, and is read
//! as raw `u64` words so the mapping to floats is fixed here rather than by a
//! library version. The algorithm is identified by [`PHASE_RNG_ID`]; change
//! it whenever any mapping below changes.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Identifier recorded alongside generated data.
pub const PHASE_RNG_ID: &str = "chacha20-seed_from_u64/u53-v1";

/// Independent sub-streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    EmbedPhase = 1,
    HostPhase = 2,
    GlyphChoice = 3,
    Split = 4,
    Weights = 5,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream` under `master`:
/// `splitmix64(splitmix64(master ^ stream) + index)`.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ stream as u64).wrapping_add(index))
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform on `[0, 1)` with 53 bits: `(next_u64 >> 11) * 2^-53`.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` by 128-bit multiply-high (`n > 0`).
#[inline]
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}
