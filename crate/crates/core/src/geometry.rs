//! Exact one-dimensional geometry on finite unions of closed intervals.
//!
//! A [`CompactSet`] is the computable slice of the compact subsets of
//! `J = [0, 1]`: a finite union of closed intervals, where a point is a
//! degenerate interval. On this class the Hausdorff metric, the covering
//! number `N_r` and the packing number `P_r` can all be computed exactly,
//! using only `f64` comparisons against the inputs (no tolerance fudging).
//!
//! A closed ball of radius `r` on the line is a closed interval of length
//! `2r`. Two closed balls are disjoint when their centers are *strictly*
//! more than `2r` apart; tangent balls share a point and are not disjoint.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("interval [{lo}, {hi}] has its endpoints out of order")]
    Reversed { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] has a non-finite endpoint")]
    NonFinite { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] leaves the ambient interval [0, 1]")]
    OutOfAmbient { lo: f64, hi: f64 },
    #[error("scale must be a positive finite radius, got {0}")]
    BadScale(f64),
    #[error("scales must be strictly decreasing ({prev} then {next})")]
    ScalesNotDecreasing { prev: f64, next: f64 },
    #[error("Hausdorff distance is undefined for empty set")]
    EmptySet,
}

/// A closed interval `[lo, hi]`; `lo == hi` encodes a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(GeometryError::NonFinite { lo, hi });
        }
        if lo > hi {
            return Err(GeometryError::Reversed { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// Radius of a closed ball.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Scale(f64);

impl Scale {
    pub fn new(r: f64) -> Result<Self, GeometryError> {
        if r.is_finite() && r > 0.0 {
            Ok(Self(r))
        } else {
            Err(GeometryError::BadScale(r))
        }
    }

    pub fn radius(self) -> f64 {
        self.0
    }

    /// Diameter of the ball, `2r`.
    pub fn diameter(self) -> f64 {
        2.0 * self.0
    }
}

/// Nonempty finite union of closed intervals in `[0, 1]`, or the empty set.
///
/// Normalized form: sorted by left endpoint, pairwise disjoint, with a
/// strictly positive gap between consecutive intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompactSet {
    intervals: Vec<Interval>,
}

impl CompactSet {
    /// The empty set.
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    /// Merges an arbitrary list of closed intervals into normal form.
    ///
    /// Touching intervals (`[a, b]` and `[b, c]`) merge, since their union
    /// is one closed interval.
    pub fn normalize<I>(raw: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = Interval>,
    {
        let mut items: Vec<Interval> = Vec::new();
        for iv in raw {
            let iv = Interval::new(iv.lo, iv.hi)?;
            if iv.lo < 0.0 || iv.hi > 1.0 {
                return Err(GeometryError::OutOfAmbient { lo: iv.lo, hi: iv.hi });
            }
            items.push(iv);
        }
        Ok(Self::from_valid(items))
    }

    /// Point set `{x_1, ..., x_n}`.
    pub fn from_points<I>(points: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = f64>,
    {
        Self::normalize(points.into_iter().map(Interval::point))
    }

    /// Normalizes intervals already known to be valid and inside `[0, 1]`.
    pub(crate) fn from_valid(mut items: Vec<Interval>) -> Self {
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for iv in items {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Number of connected components.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn union(&self, other: &CompactSet) -> CompactSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::from_valid(all)
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.lo <= x)
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &CompactSet) -> bool {
        self.intervals.iter().all(|iv| {
            let idx = other.intervals.partition_point(|o| o.hi < iv.lo);
            other
                .intervals
                .get(idx)
                .is_some_and(|o| o.contains_interval(iv))
        })
    }

    /// Distance from `x` to the set; `+inf` for the empty set.
    pub fn dist(&self, x: f64) -> f64 {
        let idx = self.intervals.partition_point(|iv| iv.hi < x);
        let mut best = f64::INFINITY;
        if let Some(iv) = self.intervals.get(idx) {
            best = if iv.lo <= x { 0.0 } else { iv.lo - x };
        }
        if idx > 0 {
            best = best.min(x - self.intervals[idx - 1].hi);
        }
        best
    }

    /// `sup_{x ∈ self} dist(x, other)`.
    ///
    /// `dist(·, other)` is piecewise linear with local maxima only at the
    /// midpoints of the gaps of `other`, so the sup over an interval is
    /// attained at one of its endpoints or at a gap midpoint inside it.
    pub fn directed_hausdorff(&self, other: &CompactSet) -> Result<f64, GeometryError> {
        if self.is_empty() || other.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        let mut sup = 0.0_f64;
        for iv in &self.intervals {
            sup = sup.max(other.dist(iv.lo)).max(other.dist(iv.hi));
            let start = other.intervals.partition_point(|o| o.hi < iv.lo);
            let start = start.saturating_sub(1);
            for pair in other.intervals[start..].windows(2) {
                let (left, right) = (pair[0].hi, pair[1].lo);
                if left > iv.hi {
                    break;
                }
                let mid = left + 0.5 * (right - left);
                if iv.contains(mid) {
                    sup = sup.max(other.dist(mid));
                }
            }
        }
        Ok(sup)
    }

    /// Convex hull of the set, if nonempty.
    pub fn convex_hull(&self) -> Option<Interval> {
        Some(Interval {
            lo: self.intervals.first()?.lo,
            hi: self.intervals.last()?.hi,
        })
    }
}

impl fmt::Display for CompactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            if iv.lo == iv.hi {
                write!(f, "{{{}}}", iv.lo)?;
            } else {
                write!(f, "[{}, {}]", iv.lo, iv.hi)?;
            }
        }
        Ok(())
    }
}

/// Hausdorff distance `max{sup_A dist(·, B), sup_B dist(·, A)}`.
pub fn hausdorff_distance(a: &CompactSet, b: &CompactSet) -> Result<f64, GeometryError> {
    Ok(a.directed_hausdorff(b)?.max(b.directed_hausdorff(a)?))
}

/// Smallest `k >= 0` with `start + k * step >= end`.
fn steps_to_reach(start: f64, end: f64, step: f64) -> u64 {
    if start >= end {
        return 0;
    }
    let mut k = ((end - start) / step).ceil().max(1.0) as u64;
    while start + (k as f64) * step < end {
        k += 1;
    }
    while k > 1 && start + ((k - 1) as f64) * step >= end {
        k -= 1;
    }
    k
}

/// Exact covering number `N_r(K)`.
///
/// Greedy sweep: each new ball is a closed interval `[x, x + 2r]` whose
/// left edge sits at the leftmost point of `K` not yet covered. This is
/// optimal on the line.
pub fn covering_number(k: &CompactSet, r: Scale) -> u64 {
    let d = r.diameter();
    let mut count = 0_u64;
    let mut edge = f64::NEG_INFINITY;
    for iv in &k.intervals {
        if iv.lo > edge {
            count += 1;
            edge = iv.lo + d;
        }
        if edge < iv.hi {
            let extra = steps_to_reach(edge, iv.hi, d);
            count += extra;
            edge += (extra as f64) * d;
        }
    }
    count
}

/// Exact packing number `P_r(K)`: the largest number of pairwise disjoint
/// closed balls of radius `r` centered in `K`.
///
/// Centers must be strictly more than `2r` apart. The greedy choice takes
/// the leftmost feasible center each time. When the leftmost feasible
/// position is the open ray `(t, ∞)` the center is "just right of `t`";
/// that infinitesimal offset is tracked symbolically so the comparisons
/// stay exact.
pub fn packing_number(k: &CompactSet, r: Scale) -> u64 {
    let d = r.diameter();
    let mut count = 0_u64;
    // Threshold every next center must strictly exceed.
    let mut threshold = f64::NEG_INFINITY;
    for iv in &k.intervals {
        let first = if iv.lo > threshold {
            iv.lo
        } else if threshold < iv.hi {
            threshold
        } else {
            continue;
        };
        count += 1;
        // Additional centers first + j*d (just right of it) with first + j*d < hi.
        let extra = steps_to_reach(first, iv.hi, d).saturating_sub(1);
        count += extra;
        let last = first + (extra as f64) * d;
        threshold = last + d;
    }
    count
}

/// One row of a box-counting table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub r: f64,
    #[serde(rename = "N_r")]
    pub covering: u64,
    #[serde(rename = "P_r")]
    pub packing: u64,
}

/// Covering and packing numbers at each scale (strictly decreasing).
pub fn count_table(k: &CompactSet, scales: &[f64]) -> Result<Vec<CountRow>, GeometryError> {
    let mut prev: Option<f64> = None;
    let mut checked = Vec::with_capacity(scales.len());
    for &r in scales {
        let s = Scale::new(r)?;
        if let Some(p) = prev {
            if r >= p {
                return Err(GeometryError::ScalesNotDecreasing { prev: p, next: r });
            }
        }
        prev = Some(r);
        checked.push(s);
    }
    Ok(checked
        .into_iter()
        .map(|s| CountRow {
            r: s.radius(),
            covering: covering_number(k, s),
            packing: packing_number(k, s),
        })
        .collect())
}

/// Writes a count table as CSV with header `r,N_r,P_r`.
///
/// Radii use the shortest representation that round-trips to the same
/// `f64`.
pub fn write_count_csv<W: Write>(mut out: W, rows: &[CountRow]) -> io::Result<()> {
    writeln!(out, "r,N_r,P_r")?;
    for row in rows {
        writeln!(out, "{:?},{},{}", row.r, row.covering, row.packing)?;
    }
    Ok(())
}

/// Parses the CSV written by [`write_count_csv`].
pub fn read_count_csv(text: &str) -> Result<Vec<CountRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("r,N_r,P_r") => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut cols = line.split(',');
            let mut next = || cols.next().ok_or_else(|| format!("short row {line:?}"));
            let r = next()?.parse::<f64>().map_err(|e| e.to_string())?;
            let covering = next()?.parse::<u64>().map_err(|e| e.to_string())?;
            let packing = next()?.parse::<u64>().map_err(|e| e.to_string())?;
            Ok(CountRow { r, covering, packing })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(raw: &[(f64, f64)]) -> CompactSet {
        CompactSet::normalize(raw.iter().map(|&(lo, hi)| Interval { lo, hi })).unwrap()
    }

    fn r(x: f64) -> Scale {
        Scale::new(x).unwrap()
    }

    #[test]
    fn normalize_merges_overlaps_and_touching() {
        assert_eq!(set(&[(0.0, 0.5), (0.25, 1.0)]), set(&[(0.0, 1.0)]));
        assert_eq!(set(&[(0.5, 0.5)]).intervals(), &[Interval::point(0.5)]);
        let s = set(&[(0.0, 0.1), (0.1, 0.2), (0.3, 0.4)]);
        assert_eq!(
            s.intervals(),
            &[Interval { lo: 0.0, hi: 0.2 }, Interval { lo: 0.3, hi: 0.4 }]
        );
        assert!(CompactSet::normalize(Vec::new()).unwrap().is_empty());
    }

    #[test]
    fn normalize_rejects_bad_input() {
        let bad = CompactSet::normalize([Interval { lo: 0.6, hi: 0.2 }]);
        assert!(matches!(bad, Err(GeometryError::Reversed { .. })));
        let out = CompactSet::normalize([Interval { lo: 0.5, hi: 1.5 }]);
        assert!(matches!(out, Err(GeometryError::OutOfAmbient { .. })));
    }

    #[test]
    fn hausdorff_examples() {
        let a = set(&[(0.1, 0.2), (0.7, 0.7)]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let p0 = set(&[(0.0, 0.0)]);
        let p1 = set(&[(1.0, 1.0)]);
        assert_eq!(hausdorff_distance(&p0, &p1).unwrap(), 1.0);
        let unit = set(&[(0.0, 1.0)]);
        let ends = set(&[(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(hausdorff_distance(&unit, &ends).unwrap(), 0.5);
        assert_eq!(
            hausdorff_distance(&unit, &CompactSet::empty()),
            Err(GeometryError::EmptySet)
        );
    }

    #[test]
    fn covering_examples() {
        assert_eq!(covering_number(&set(&[(0.5, 0.5)]), r(0.1)), 1);
        assert_eq!(covering_number(&set(&[(0.0, 1.0)]), r(0.25)), 2);
        let pts = CompactSet::from_points([1.0, 0.5, 1.0 / 3.0, 0.25]).unwrap();
        assert_eq!(covering_number(&pts, r(1.0 / 24.0)), 3);
        assert_eq!(covering_number(&CompactSet::empty(), r(0.1)), 0);
    }

    #[test]
    fn packing_examples() {
        assert_eq!(packing_number(&set(&[(0.3, 0.3)]), r(0.4)), 1);
        assert_eq!(packing_number(&set(&[(0.0, 1.0)]), r(0.25)), 2);
        let pts = CompactSet::from_points([0.0, 0.5, 1.0]).unwrap();
        assert_eq!(packing_number(&pts, r(0.2)), 3);
        // Tangent balls are not disjoint.
        assert_eq!(packing_number(&pts, r(0.25)), 2);
        assert_eq!(packing_number(&CompactSet::empty(), r(0.1)), 0);
    }

    #[test]
    fn packing_carries_infinitesimal_offsets_across_intervals() {
        // A center at 0.5 would be tangent to the one at 0.
        let s = set(&[(0.0, 0.5), (1.0, 1.0)]);
        assert_eq!(packing_number(&s, r(0.25)), 2);
        let s = set(&[(0.0, 0.6), (0.9, 1.0)]);
        assert_eq!(packing_number(&s, r(0.25)), 2);
        let s = set(&[(0.0, 0.6), (1.0, 1.0)]);
        assert_eq!(packing_number(&s, r(0.2)), 3);
    }

    #[test]
    fn count_table_rows() {
        let unit = set(&[(0.0, 1.0)]);
        let rows = count_table(&unit, &[0.5, 0.25]).unwrap();
        assert_eq!(
            rows,
            vec![
                CountRow { r: 0.5, covering: 1, packing: 1 },
                CountRow { r: 0.25, covering: 2, packing: 2 },
            ]
        );
        let pt = set(&[(0.5, 0.5)]);
        for row in count_table(&pt, &[0.3, 0.01, 1e-9]).unwrap() {
            assert_eq!((row.covering, row.packing), (1, 1));
        }
        assert!(count_table(&unit, &[]).unwrap().is_empty());
        assert!(count_table(&unit, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let unit = set(&[(0.0, 1.0)]);
        let rows = count_table(&unit, &[0.5, 0.1, 1.0 / 3.0e5]).unwrap();
        let mut buf = Vec::new();
        write_count_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,N_r,P_r\n"));
        assert_eq!(read_count_csv(&text).unwrap(), rows);
    }

    #[test]
    fn subset_and_contains() {
        let big = set(&[(0.0, 0.3), (0.5, 0.9)]);
        let small = set(&[(0.1, 0.2), (0.6, 0.6)]);
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        assert!(big.contains(0.3) && !big.contains(0.4));
    }
}
