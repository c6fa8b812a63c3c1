//! Counter-based seed splitting: every stage derives its own stream from
//! one master seed.

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `counter` of `master`.
pub fn derive(master: u64, counter: u64) -> u64 {
    mix(mix(master ^ 0x9E37_79B9_7F4A_7C15).wrapping_add(counter.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Seed for a named stage ("generate", "train", ...).
pub fn stage(master: u64, name: &str) -> u64 {
    // FNV-1a over the stage name.
    let h = name
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    derive(master, h)
}
