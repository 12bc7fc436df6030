//! Deterministic seed derivation. Every random draw in the toolkit comes from
//! a ChaCha stream seeded through here, so a master seed fully determines a
//! run regardless of thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of salts into a child seed.
pub fn derive(master: u64, salts: &[u64]) -> u64 {
    let mut z = splitmix(master);
    for &s in salts {
        z = splitmix(z ^ s.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    z
}

/// RNG for the given (master, salts) stream.
pub fn rng(master: u64, salts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, salts))
}
