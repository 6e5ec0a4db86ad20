//! Deterministic seed derivation for parallel Monte-Carlo trials.
//!
//! Every trial owns an independent generator seeded from the master seed and
//! its position in the sweep, so results do not depend on scheduling or
//! worker count.

/// SplitMix64 finalizer; a bijective 64-bit mixer.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream seed for (master, index).
pub fn derive_seed2(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index ^ 0xA5A5_A5A5_A5A5_A5A5))
}

/// Independent stream seed for (master, axis-point index, trial index).
pub fn derive_seed3(master: u64, point: u64, trial: u64) -> u64 {
    mix64(derive_seed2(master, point) ^ mix64(trial))
}
