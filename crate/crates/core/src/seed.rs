//! Counter-based seed derivation.
//!
//! Every random stream in a run is keyed by `(parent seed, stream id, index)`
//! and mixed through the SplitMix64 finalizer, so any realization or state can
//! be regenerated without replaying the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. Distinct ids keep derived seeds for different purposes
/// from colliding.
pub mod stream {
    pub const DISORDER: u64 = 0x01;
    pub const STATE: u64 = 0x02;
    pub const LBIT: u64 = 0x03;
    pub const OPTIMIZER: u64 = 0x04;
    pub const SIZE: u64 = 0x10;
    pub const FIELD_STRENGTH: u64 = 0x11;
    pub const VALIDATION: u64 = 0x20;
}

/// The SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a stream id and an index.
pub fn derive_seed(parent: u64, stream: u64, index: u64) -> u64 {
    let a = splitmix64(parent ^ splitmix64(stream));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Portable, reproducible RNG stream for a derived seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0
        // are splitmix64(0), splitmix64(golden), ...
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn derived_seeds_distinct() {
        let mut seen = HashSet::new();
        for s in 0..4 {
            for i in 0..1000 {
                assert!(seen.insert(derive_seed(42, s, i)));
            }
        }
    }

    #[test]
    fn derivation_is_pure() {
        assert_eq!(derive_seed(7, stream::DISORDER, 3), derive_seed(7, stream::DISORDER, 3));
        assert_ne!(derive_seed(7, stream::DISORDER, 3), derive_seed(7, stream::STATE, 3));
    }
}
