//! Deterministic derivation of stream seeds from a base seed.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent stream seed for substream `stream` of `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream.wrapping_add(0x51ed_270b)))
}

/// Folds several indices into one substream tag.
pub fn mix(indices: &[u64]) -> u64 {
    let mut acc = 0xcafe_f00d_u64;
    for &i in indices {
        acc = splitmix64(acc ^ i);
    }
    acc
}
