//! Per-instance seed derivation.
//!
//! Corpus building hands every instance its own RNG seeded from
//! `(master_seed, instance_index)`. Instances can therefore be generated in
//! any order — or on any number of threads — and still come out identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a master seed and a stream index into an independent child seed.
///
/// Uses the splitmix64 finalizer, which is a bijection on `u64`, so distinct
/// `(master, stream)` pairs with the same master never collide.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for one generation stream, derived from the master seed.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}
