use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream number `stream` of the master `seed`.
///
/// ChaCha supports 2^64 independent streams per key, so tasks keyed by index
/// get reproducible draws regardless of worker count.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a two-level task index (outer node, inner node).
pub fn nested_stream(outer: usize, inner: usize) -> u64 {
    ((outer as u64) << 32) | (inner as u64 & 0xffff_ffff)
}

/// Child seed number `index` of `seed` (SplitMix64 finaliser).
///
/// Used when a task itself fans out into streamed subtasks.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
