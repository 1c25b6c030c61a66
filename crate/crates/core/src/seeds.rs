//! Seed derivation: one root seed is split into independent purpose-tagged
//! streams (weight init, data, perturbations, per-step batches) so components
//! can be varied independently while every run stays reproducible.

/// SplitMix64 finalizer over `seed` xor a tagged stream index.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Purpose tags for the standard streams.
pub mod stream {
    pub const INIT: u64 = 1;
    pub const DATA: u64 = 2;
    pub const PERTURBATION: u64 = 3;
    pub const INITIAL_STATE: u64 = 4;
}
