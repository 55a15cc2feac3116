//! Counter-based seed derivation so that sample `k` of a sweep gets the same
//! random stream regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed derived from a root seed and a path of counters.
pub fn derive(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(root, 0x5EED), |acc, &k| mix(acc, k))
}

/// Generator for stream `path` below `root`.
pub fn rng_for(root: u64, path: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(root, path));
    rng.set_stream(path.first().copied().unwrap_or(0));
    rng
}
