//! Deterministic stream derivation for every randomized component.
//!
//! A stream is keyed by (suite seed, textual label, stream index). Results
//! therefore depend only on these keys, never on thread count or scheduling:
//! parallel drivers hand out whole index ranges and each range derives its
//! own generator. ChaCha8 is used for its quality and for portable,
//! platform-independent output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Collapse (seed, label, index) into a single 64-bit stream key:
/// FNV-1a over the label, mixed with the seed and index through a
/// splitmix64 finalizer.
pub fn mix_seed(seed: u64, label: &str, idx: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h = (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed
        ^ h.rotate_left(17)
        ^ idx.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for one derived stream.
pub fn stream_rng(seed: u64, label: &str, idx: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, label, idx))
}
