//! Offspring laws: how a cell spawns its children.
//!
//! Diameters and ratios are carried as natural logarithms. The built-in
//! infinite-branching models have reduction ratios like `16^-n`, which leave
//! the `f64` range after a few hundred children while the child positions
//! (e.g. `1/n^p`) remain perfectly representable.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ConstructionError;
use crate::dimension::ExpectedSumCurve;
use crate::geometry::Interval;
use crate::rng::NodeRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Preserving,
    Reversing,
}

impl Orientation {
    pub fn compose(self, inner: Orientation) -> Orientation {
        if self == inner {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }
}

/// Similarity of `[0, 1]` onto the closed subinterval
/// `[offset, offset + ratio]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub ln_ratio: f64,
    pub offset: f64,
    pub orientation: Orientation,
}

impl SimilarityMap {
    pub fn identity() -> Self {
        Self {
            ln_ratio: 0.0,
            offset: 0.0,
            orientation: Orientation::Preserving,
        }
    }

    pub fn new(ratio: f64, offset: f64, orientation: Orientation) -> Result<Self, ConstructionError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(ConstructionError::BadMap(format!("ratio {ratio} outside (0, 1]")));
        }
        Self::from_ln(ratio.ln(), offset, orientation)
    }

    pub fn from_ln(ln_ratio: f64, offset: f64, orientation: Orientation) -> Result<Self, ConstructionError> {
        if !(ln_ratio.is_finite() && ln_ratio <= 0.0) {
            return Err(ConstructionError::BadMap(format!("log-ratio {ln_ratio} is not in (-inf, 0]")));
        }
        let hi = offset + ln_ratio.exp();
        if !(offset >= 0.0 && hi <= 1.0) {
            return Err(ConstructionError::BadMap(format!(
                "image [{offset}, {hi}] leaves [0, 1]"
            )));
        }
        Ok(Self { ln_ratio, offset, orientation })
    }

    pub fn ratio(&self) -> f64 {
        self.ln_ratio.exp()
    }

    pub fn apply(&self, x: f64) -> f64 {
        let r = self.ratio();
        match self.orientation {
            Orientation::Preserving => self.offset + r * x,
            Orientation::Reversing => self.offset + r * (1.0 - x),
        }
    }

    /// Image of `[0, 1]`.
    pub fn image(&self) -> Interval {
        Interval {
            lo: self.offset,
            hi: (self.offset + self.ratio()).min(1.0),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SimilarityMap) -> SimilarityMap {
        let r = self.ratio();
        let inner_hi = inner.offset + inner.ratio();
        let offset = match self.orientation {
            Orientation::Preserving => self.offset + r * inner.offset,
            Orientation::Reversing => self.offset + r * (1.0 - inner_hi),
        };
        SimilarityMap {
            ln_ratio: self.ln_ratio + inner.ln_ratio,
            offset,
            orientation: self.orientation.compose(inner.orientation),
        }
    }
}

/// Truncation threshold for offspring diameters, stored as `ln ε`.
///
/// Values far below `f64::MIN_POSITIVE` are legal; use [`Truncation::from_log10`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Truncation {
    ln_eps: f64,
}

impl Truncation {
    /// No truncation at all; every offspring is kept.
    pub fn none() -> Self {
        Self { ln_eps: f64::MIN }
    }

    pub fn from_eps(eps: f64) -> Result<Self, ConstructionError> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Self { ln_eps: eps.ln() })
        } else {
            Err(ConstructionError::BadTruncation(eps))
        }
    }

    pub fn from_log10(log10_eps: f64) -> Result<Self, ConstructionError> {
        if log10_eps.is_finite() {
            Ok(Self {
                ln_eps: log10_eps * std::f64::consts::LN_10,
            })
        } else {
            Err(ConstructionError::BadTruncation(log10_eps))
        }
    }

    pub fn ln(self) -> f64 {
        self.ln_eps
    }

    pub fn log10(self) -> f64 {
        self.ln_eps / std::f64::consts::LN_10
    }

    /// `ε` itself; zero when it underflows.
    pub fn value(self) -> f64 {
        self.ln_eps.exp()
    }

    /// True when a cell of log-diameter `ln_diam` is kept.
    pub fn keeps(self, ln_diam: f64) -> bool {
        ln_diam >= self.ln_eps
    }
}

/// How many offspring a truncation dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Omitted {
    Finite(u64),
    Unbounded,
}

impl Omitted {
    pub fn add(self, other: Omitted) -> Omitted {
        match (self, other) {
            (Omitted::Finite(a), Omitted::Finite(b)) => Omitted::Finite(a + b),
            _ => Omitted::Unbounded,
        }
    }
}

/// Upper bound on `Σ ratio^t` over omitted offspring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBound {
    /// The omitted log-ratios themselves.
    Explicit(Vec<f64>),
    /// Ratios dominated by `c * q^n` for every index `n >= first`.
    Geometric { ln_c: f64, ln_q: f64, first: u64 },
    /// Ratios dominated by `c * n^-exponent` for every index `n >= first`.
    PowerLaw { ln_c: f64, exponent: f64, first: u64 },
}

impl TailBound {
    /// Bound on `Σ ratio^t` for `t > 0`.
    pub fn power_sum(&self, t: f64) -> f64 {
        self.ln_power_sum(t).exp()
    }

    /// Log of [`TailBound::power_sum`]; `-inf` for an empty tail, `+inf`
    /// when the bounding series diverges.
    pub fn ln_power_sum(&self, t: f64) -> f64 {
        match self {
            TailBound::Explicit(ln_ratios) => log_sum_exp(ln_ratios.iter().map(|l| t * l)),
            TailBound::Geometric { ln_c, ln_q, first } => {
                let ln_head = t * ln_c + t * ln_q * (*first as f64);
                ln_head - (-(t * ln_q).exp_m1()).ln()
            }
            TailBound::PowerLaw { ln_c, exponent, first } => {
                let a = t * exponent;
                if a <= 1.0 {
                    return f64::INFINITY;
                }
                // Sum bounded by its first term plus the integral beyond it.
                let ln_n = (*first as f64).ln();
                t * ln_c + log_sum_exp([-a * ln_n, (1.0 - a) * ln_n - (a - 1.0).ln()])
            }
        }
    }
}

pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// What a truncation removed from one brood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    /// Digit of the first omitted child.
    pub first_omitted: u32,
    pub omitted: Omitted,
    /// Interval (in the parent's unit coordinates) holding every omitted child.
    pub hull: Interval,
    pub bound: TailBound,
}

/// One child slot. Absent children model extinction: the slot was drawn
/// but the cell is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Child {
    pub digit: u32,
    pub map: SimilarityMap,
    pub present: bool,
}

/// The offspring of one cell after truncation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Brood {
    pub children: Vec<Child>,
    pub tail: Option<Tail>,
}

impl Brood {
    /// Splits a finite candidate list by the truncation rule.
    pub fn truncate_finite(candidates: Vec<Child>, ctx: &SpawnContext<'_>) -> Brood {
        let (kept, dropped): (Vec<Child>, Vec<Child>) = candidates
            .into_iter()
            .partition(|c| ctx.truncation.keeps(ctx.ln_parent_diam + c.map.ln_ratio));
        let tail = dropped.first().map(|first| {
            let lo = dropped.iter().map(|c| c.map.image().lo).fold(f64::INFINITY, f64::min);
            let hi = dropped.iter().map(|c| c.map.image().hi).fold(f64::NEG_INFINITY, f64::max);
            Tail {
                first_omitted: first.digit,
                omitted: Omitted::Finite(dropped.len() as u64),
                hull: Interval { lo, hi },
                bound: TailBound::Explicit(dropped.iter().map(|c| c.map.ln_ratio).collect()),
            }
        });
        Brood { children: kept, tail }
    }
}

/// Everything a law may condition on when spawning a cell.
#[derive(Debug, Clone, Copy)]
pub struct SpawnContext<'a> {
    /// Depth of the parent cell (the root is level 0).
    pub level: usize,
    pub ln_parent_diam: f64,
    pub truncation: Truncation,
    /// Parameters drawn once per realization.
    pub globals: &'a [f64],
}

/// Random offspring generator of a construction.
pub trait OffspringLaw: Send + Sync + fmt::Debug {
    /// Parameters shared by the whole realization, drawn once from a
    /// dedicated stream.
    fn draw_globals(&self, _rng: &mut NodeRng) -> Vec<f64> {
        Vec::new()
    }

    /// Children of a nonempty cell, omitting exactly those whose absolute
    /// diameter falls below the truncation threshold.
    fn spawn(&self, ctx: &SpawnContext<'_>, rng: &mut NodeRng) -> Brood;

    /// Largest possible reduction ratio.
    fn max_ratio(&self) -> f64;

    /// Exact expected-sum curve `β ↦ E[Σ T_i^β]`, when the law admits one.
    fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelFlags {
    pub deterministic_ratios: bool,
    pub self_similar: bool,
    pub finite_branching: bool,
    pub level_dependent: bool,
    /// Shallowest level from which every cell spawns by the same law.
    pub self_similar_from_level: Option<u32>,
}

/// A named construction model.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    parameters: BTreeMap<String, f64>,
    flags: ModelFlags,
    law: Arc<dyn OffspringLaw>,
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        parameters: BTreeMap<String, f64>,
        flags: ModelFlags,
        law: Arc<dyn OffspringLaw>,
    ) -> Self {
        Self {
            name: name.into(),
            parameters,
            flags,
            law,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn flags(&self) -> ModelFlags {
        self.flags
    }

    pub fn law(&self) -> &dyn OffspringLaw {
        self.law.as_ref()
    }

    pub fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        self.law.expected_sum_curve()
    }
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("parameters", &self.parameters)
            .field("flags", &self.flags)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_matches_pointwise_application() {
        let outer = SimilarityMap::new(0.5, 0.25, Orientation::Reversing).unwrap();
        let inner = SimilarityMap::new(0.2, 0.7, Orientation::Preserving).unwrap();
        let comp = outer.compose(&inner);
        for x in [0.0, 0.3, 1.0] {
            assert!((comp.apply(x) - outer.apply(inner.apply(x))).abs() < 1e-15);
        }
        assert!((comp.ratio() - 0.1).abs() < 1e-15);
        assert_eq!(comp.orientation, Orientation::Reversing);
    }

    #[test]
    fn similarity_scales_distances() {
        let m = SimilarityMap::new(0.3, 0.1, Orientation::Reversing).unwrap();
        let (x, y) = (0.2, 0.9);
        assert!(((m.apply(x) - m.apply(y)).abs() - 0.3 * (x - y).abs()).abs() < 1e-15);
        assert!(SimilarityMap::new(0.5, 0.6, Orientation::Preserving).is_err());
        assert!(SimilarityMap::new(0.0, 0.1, Orientation::Preserving).is_err());
    }

    #[test]
    fn geometric_tail_matches_direct_sum() {
        let bound = TailBound::Geometric {
            ln_c: 0.5_f64.ln(),
            ln_q: (1.0_f64 / 16.0).ln(),
            first: 3,
        };
        let t = 0.25;
        let direct: f64 = (3..400).map(|n| (0.5 * 16f64.powi(-n)).powf(t)).sum();
        assert!((bound.power_sum(t) - direct).abs() < 1e-12 * direct);
        let explicit = TailBound::Explicit(vec![0.1f64.ln(), 0.2f64.ln()]);
        assert!((explicit.power_sum(1.0) - 0.3).abs() < 1e-15);
        assert_eq!(TailBound::Explicit(vec![]).power_sum(1.0), 0.0);
    }

    #[test]
    fn power_law_tail_bounds_and_diverges() {
        let bound = TailBound::PowerLaw { ln_c: 0.0, exponent: 2.0, first: 10 };
        let direct: f64 = (10..200_000).map(|n| (n as f64).powi(-2)).sum();
        assert!(bound.power_sum(1.0) >= direct);
        assert!(bound.power_sum(1.0) < direct * 1.1);
        assert_eq!(bound.power_sum(0.5), f64::INFINITY);
    }

    #[test]
    fn truncation_thresholds() {
        let t = Truncation::from_log10(-4000.0).unwrap();
        assert_eq!(t.value(), 0.0);
        assert!(t.keeps(-9000.0) && !t.keeps(-9300.0));
        assert!(Truncation::from_eps(0.0).is_err());
        assert!((Truncation::from_eps(1e-7).unwrap().log10() + 7.0).abs() < 1e-12);
    }
}
