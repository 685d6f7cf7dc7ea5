//! Structural checks on sampled realizations.

use serde::{Deserialize, Serialize};

use super::realization::Realization;
use crate::geometry::Interval;

/// Interiors overlapping by at most this much still count as disjoint.
pub const OSC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscReport {
    pub ok: bool,
    /// Largest interior overlap between two same-level cells; negative
    /// values are the smallest gap.
    pub worst_overlap: f64,
    /// The pair attaining `worst_overlap`, as level indices.
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks that the nonempty level-`k` cells have pairwise disjoint interiors.
pub fn validate_osc(rz: &Realization, k: usize) -> OscReport {
    let cells: Vec<(usize, Interval)> = rz
        .level(k)
        .iter()
        .enumerate()
        .filter(|(_, n)| n.is_alive())
        .map(|(i, n)| (i, n.interval))
        .collect();
    osc_of_intervals(cells)
}

/// Disjoint-interior check for arbitrary labelled intervals.
pub fn osc_of_intervals(mut cells: Vec<(usize, Interval)>) -> OscReport {
    cells.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo));
    let mut worst = f64::NEG_INFINITY;
    let mut pair = None;
    // The interval reaching furthest right so far overlaps the next one most.
    let mut reach: Option<(usize, f64)> = None;
    for &(i, iv) in &cells {
        if let Some((j, hi)) = reach {
            let overlap = hi - iv.lo;
            if overlap > worst {
                worst = overlap;
                pair = Some((j, i));
            }
        }
        if reach.map_or(true, |(_, hi)| iv.hi > hi) {
            reach = Some((i, iv.hi));
        }
    }
    if pair.is_none() {
        worst = 0.0;
    }
    OscReport {
        ok: worst <= OSC_TOLERANCE,
        worst_overlap: worst,
        worst_pair: pair,
    }
}

/// Number of level-`k` cells meeting `[z - r, z + r]` whose diameter is at
/// least `r / 2`.
pub fn neighborhood_bound_probe(rz: &Realization, k: usize, z: f64, r: f64) -> usize {
    let ln_half = (r / 2.0).ln();
    let window = Interval { lo: z - r, hi: z + r };
    rz.level(k)
        .iter()
        .filter(|n| n.is_alive() && n.ln_diam >= ln_half)
        .filter(|n| n.interval.hi >= window.lo && n.interval.lo <= window.hi)
        .count()
}
