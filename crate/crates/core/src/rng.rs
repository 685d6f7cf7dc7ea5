//! Counter-style random streams keyed by `(seed, path)`.
//!
//! Every tree node draws from its own ChaCha stream whose key is a hash of
//! the realization seed and the node's digits. The draw at a node is then
//! independent of the order in which the tree is traversed, and two
//! sampling strategies that visit the same address see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type NodeRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of the root node for `seed`.
pub fn root_key(seed: u64) -> u64 {
    mix64(seed ^ 0x5851_f42d_4c95_7f2d)
}

/// Key of child `digit` given its parent's key.
pub fn child_key(parent: u64, digit: u32) -> u64 {
    mix64(parent.rotate_left(17) ^ mix64(u64::from(digit)))
}

/// Key for the per-realization stream (global parameters such as a random
/// exponent shared by every node). Distinct from every node key by domain.
pub fn realization_key(seed: u64) -> u64 {
    mix64(seed ^ 0x2545_f491_4f6c_dd1d).rotate_left(29)
}

/// Seed of replica `index` in a batch started from `seed`.
pub fn replica_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ 0x1405_7b7e_f767_814f) ^ index)
}

pub fn stream(key: u64) -> NodeRng {
    NodeRng::seed_from_u64(key)
}

/// Key of an arbitrary path from the root.
pub fn path_key(seed: u64, digits: &[u32]) -> u64 {
    digits.iter().fold(root_key(seed), |k, &d| child_key(k, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn keys_depend_on_order_of_digits() {
        assert_ne!(path_key(1, &[1, 2]), path_key(1, &[2, 1]));
        assert_ne!(path_key(1, &[1]), path_key(2, &[1]));
        assert_ne!(path_key(7, &[]), realization_key(7));
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(path_key(3, &[4, 1])), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(path_key(3, &[4, 1])), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
    }
}
