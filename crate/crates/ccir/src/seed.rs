//! Deterministic seed derivation.
//!
//! All randomness in a run flows from one top-level seed. Sub-tasks derive
//! their own seeds as `splitmix64(seed XOR fnv1a(tag))`, so components are
//! independently reproducible and the derivation is stable across platforms
//! and releases (unlike `std`'s default hasher).

/// Derives a child seed for a named sub-task.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in tag.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
