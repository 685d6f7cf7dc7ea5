//! Exhaustive reference implementations of the covering and packing
//! numbers, for sets with few components.

use crate::geometry::CompactSet;

/// Minimal number of closed intervals of length `2r` covering `k`.
///
/// Every optimal cover splits the components into runs of consecutive
/// intervals, each run covered by a connected chain of balls; a chain over a
/// run of hull length `h` needs `max(1, ⌈h / 2r⌉)` balls. Tries every split.
pub fn brute_covering(k: &CompactSet, r: f64) -> u64 {
    let ivs = k.intervals();
    let m = ivs.len();
    if m == 0 {
        return 0;
    }
    assert!(m <= 20, "exhaustive covering is exponential in the component count");
    let d = 2.0 * r;
    let mut best = u64::MAX;
    for mask in 0..(1u32 << (m - 1)) {
        let mut total = 0u64;
        let mut start = 0;
        for i in 0..m {
            let cut = i == m - 1 || mask & (1 << i) != 0;
            if cut {
                let h = ivs[i].hi - ivs[start].lo;
                total += ((h / d).ceil() as u64).max(1);
                start = i + 1;
            }
        }
        best = best.min(total);
    }
    best
}

/// Largest number of centers in `k` that are pairwise more than `2r` apart.
///
/// Sliding every center of an optimal packing as far left as it will go
/// leaves each one either on a component's left endpoint or exactly one step
/// (`2r`, slightly enlarged to make the inequality strict) after its
/// predecessor. The candidates are therefore the step chains started at left
/// endpoints, and the optimum is the longest admissible chain through them.
pub fn brute_packing(k: &CompactSet, r: f64) -> u64 {
    let step = 2.0 * r * (1.0 + 1e-9);
    let mut candidates = Vec::new();
    for a in k.intervals() {
        let mut x = a.lo;
        let mut j = 0.0;
        while k.contains(x) {
            candidates.push(x);
            j += 1.0;
            x = a.lo + j * step;
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // best[i]: longest chain ending at candidates[i]; prefix[i]: max of best[..=i].
    let mut prefix: Vec<u64> = Vec::with_capacity(candidates.len());
    let mut j = 0;
    for i in 0..candidates.len() {
        while j < i && candidates[i] - candidates[j] > 2.0 * r {
            j += 1;
        }
        let best = if j == 0 { 1 } else { prefix[j - 1] + 1 };
        let prev = prefix.last().copied().unwrap_or(0);
        prefix.push(prev.max(best));
    }
    prefix.last().copied().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;

    fn set(ivs: &[(f64, f64)]) -> CompactSet {
        CompactSet::normalize(ivs.iter().map(|&(a, b)| Interval::new(a, b).unwrap())).unwrap()
    }

    #[test]
    fn known_values() {
        assert_eq!(brute_covering(&set(&[(0.0, 1.0)]), 0.25), 2);
        let pts = set(&[(1.0, 1.0), (0.5, 0.5), (1.0 / 3.0, 1.0 / 3.0), (0.25, 0.25)]);
        assert_eq!(brute_covering(&pts, 1.0 / 24.0), 3);
        assert_eq!(brute_packing(&set(&[(0.0, 1.0)]), 0.25), 2);
        assert_eq!(brute_packing(&set(&[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]), 0.2), 3);
        // The second center must sit inside the second component, past 0.55.
        assert_eq!(brute_packing(&set(&[(0.3, 0.3), (0.54, 0.56)]), 0.125), 2);
    }
}
