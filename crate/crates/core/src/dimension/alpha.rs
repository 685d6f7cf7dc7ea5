//! The expected-sum curve `β ↦ E[Σ T_i^β]` and its root.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DimensionError;
use crate::construction::{log_sum_exp, ModelSpec, SpawnContext, TailBound, Truncation};
use crate::rng;
use crate::stats::Z_99;

/// Lower end of the bisection bracket.
pub const BETA_MIN: f64 = 1e-6;
pub const EXACT_TOLERANCE: f64 = 1e-9;
pub const MONTE_CARLO_TOLERANCE: f64 = 1e-3;
pub const MONTE_CARLO_SAMPLES: usize = 10_000;

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How `E[Σ T_i^β]` is evaluated.
#[derive(Clone)]
pub enum ExpectedSumCurve {
    /// Deterministic ratios: a finite list plus a bound on the rest.
    Series {
        ln_ratios: Vec<f64>,
        tail: Option<TailBound>,
    },
    /// A closed-form expectation.
    Analytic { label: String, f: CurveFn },
    /// Sample mean over fixed draws of the ratio vector, each with the
    /// bound on what truncation removed from it.
    MonteCarlo {
        samples: Vec<(Vec<f64>, Option<TailBound>)>,
        z: f64,
    },
}

impl fmt::Debug for ExpectedSumCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Series { ln_ratios, tail } => f
                .debug_struct("Series")
                .field("terms", &ln_ratios.len())
                .field("tail", tail)
                .finish(),
            Self::Analytic { label, .. } => f.debug_struct("Analytic").field("label", label).finish(),
            Self::MonteCarlo { samples, z } => f
                .debug_struct("MonteCarlo")
                .field("samples", &samples.len())
                .field("z", z)
                .finish(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    ExactSeries,
    MonteCarlo,
}

/// Value of the curve at one `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SumValue {
    /// The true value lies in `[lo, hi]`. For exact series `estimate = lo`
    /// is the partial sum and `hi - lo` the tail bound; for Monte Carlo
    /// `estimate` is the mean and the interval its confidence band.
    Bounded { estimate: f64, lo: f64, hi: f64 },
    Divergent,
}

impl SumValue {
    pub fn lo(self) -> f64 {
        match self {
            SumValue::Bounded { lo, .. } => lo,
            SumValue::Divergent => f64::INFINITY,
        }
    }

    pub fn hi(self) -> f64 {
        match self {
            SumValue::Bounded { hi, .. } => hi,
            SumValue::Divergent => f64::INFINITY,
        }
    }
}

impl ExpectedSumCurve {
    /// Ratios given directly, with no tail.
    pub fn from_ratios(ratios: &[f64]) -> Self {
        Self::Series {
            ln_ratios: ratios.iter().map(|r| r.ln()).collect(),
            tail: None,
        }
    }

    /// Monte Carlo curve from `samples` root broods of `model`, drawn with
    /// seed-derived streams. The draws are fixed, so the curve is a smooth
    /// function of `β`.
    pub fn monte_carlo(model: &ModelSpec, samples: usize, seed: u64, truncation: Truncation) -> Self {
        let law = model.law();
        let draws = (0..samples as u64)
            .into_par_iter()
            .map(|i| {
                let s = rng::replica_seed(seed, i);
                let globals = law.draw_globals(&mut rng::stream(rng::realization_key(s)));
                let ctx = SpawnContext {
                    level: 0,
                    ln_parent_diam: 0.0,
                    truncation,
                    globals: &globals,
                };
                let brood = law.spawn(&ctx, &mut rng::stream(rng::root_key(s)));
                let ln_ratios = brood
                    .children
                    .iter()
                    .filter(|c| c.present)
                    .map(|c| c.map.ln_ratio)
                    .collect();
                (ln_ratios, brood.tail.map(|t| t.bound))
            })
            .collect();
        Self::MonteCarlo { samples: draws, z: Z_99 }
    }

    pub fn mode(&self) -> CurveMode {
        match self {
            Self::MonteCarlo { .. } => CurveMode::MonteCarlo,
            _ => CurveMode::ExactSeries,
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self.mode() {
            CurveMode::ExactSeries => EXACT_TOLERANCE,
            CurveMode::MonteCarlo => MONTE_CARLO_TOLERANCE,
        }
    }

    /// `E[Σ T_i^β]` with its error interval.
    pub fn evaluate(&self, beta: f64) -> SumValue {
        match self {
            Self::Series { ln_ratios, tail } => {
                let partial = log_sum_exp(ln_ratios.iter().map(|l| beta * l)).exp();
                let rest = tail.as_ref().map_or(0.0, |t| t.power_sum(beta));
                if rest.is_infinite() {
                    return SumValue::Divergent;
                }
                SumValue::Bounded {
                    estimate: partial,
                    lo: partial,
                    hi: partial + rest,
                }
            }
            Self::Analytic { f, .. } => {
                let v = f(beta);
                if v.is_infinite() {
                    return SumValue::Divergent;
                }
                SumValue::Bounded { estimate: v, lo: v, hi: v }
            }
            Self::MonteCarlo { samples, z } => {
                let n = samples.len() as f64;
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                let mut tail_sum = 0.0;
                for (ln_ratios, tail) in samples {
                    let s = log_sum_exp(ln_ratios.iter().map(|l| beta * l)).exp();
                    sum += s;
                    sum_sq += s * s;
                    tail_sum += tail.as_ref().map_or(0.0, |t| t.power_sum(beta));
                }
                if tail_sum.is_infinite() {
                    return SumValue::Divergent;
                }
                let mean = sum / n;
                let var = if n > 1.0 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                let half = z * (var / n).sqrt();
                SumValue::Bounded {
                    estimate: mean,
                    lo: mean - half,
                    hi: mean + half + tail_sum / n,
                }
            }
        }
    }

    /// True when the curve is strictly decreasing along the grid, judged on
    /// point estimates.
    pub fn is_strictly_decreasing(&self, betas: &[f64]) -> bool {
        let vals: Vec<f64> = betas
            .iter()
            .map(|&b| match self.evaluate(b) {
                SumValue::Bounded { estimate, .. } => estimate,
                SumValue::Divergent => f64::INFINITY,
            })
            .collect();
        vals.windows(2).all(|w| w[1] < w[0])
    }
}

/// `E[Σ T_i^β]` at one exponent.
pub fn expected_sum_ratios(curve: &ExpectedSumCurve, beta: f64) -> Result<SumValue, DimensionError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(DimensionError::BadExponent(beta));
    }
    Ok(curve.evaluate(beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSolution {
    pub alpha: f64,
    /// Certified enclosure of the root, widened by the evaluation error.
    pub bracket: [f64; 2],
    /// `|E[Σ T_i^α] − 1|` at the point estimate.
    pub residual: f64,
    /// Width of the error interval of the curve at `alpha`.
    pub tail_bound_at_alpha: f64,
    pub mode: CurveMode,
    pub tolerance: f64,
}

/// Solves `E[Σ T_i^α] = 1` (the infimum form `inf{β : E ≤ 1}` when the
/// series diverges below some exponent) by bisection on `[1e-6, 1]`.
///
/// The upper end of the bracket is where the upper bound of the curve
/// reaches 1, the lower end where the lower bound does.
pub fn solve_alpha(curve: &ExpectedSumCurve, tol: f64) -> Result<AlphaSolution, DimensionError> {
    if !(tol > 0.0) {
        return Err(DimensionError::BadTolerance(tol));
    }
    let at_min = curve.evaluate(BETA_MIN);
    if at_min.lo() <= 1.0 {
        return Err(DimensionError::Subcritical(at_min.lo()));
    }
    let at_one = curve.evaluate(1.0);
    if at_one.hi() > 1.0 {
        return Err(DimensionError::NoBracket(at_one.hi()));
    }
    let upper = bisect(|b| curve.evaluate(b).hi() <= 1.0, tol).1;
    let lower = bisect(|b| curve.evaluate(b).lo() <= 1.0, tol).0;
    let alpha = 0.5 * (lower + upper);
    let value = curve.evaluate(alpha);
    let (residual, width) = match value {
        SumValue::Bounded { estimate, lo, hi } => ((estimate - 1.0).abs(), hi - lo),
        SumValue::Divergent => (f64::INFINITY, f64::INFINITY),
    };
    Ok(AlphaSolution {
        alpha,
        bracket: [lower, upper],
        residual,
        tail_bound_at_alpha: width,
        mode: curve.mode(),
        tolerance: tol,
    })
}

/// Bisects a monotone predicate false at `BETA_MIN` and true at 1, returning
/// the final `(false, true)` pair.
fn bisect<F: Fn(f64) -> bool>(reached: F, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (BETA_MIN, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_ratio_sums() {
        let half = ExpectedSumCurve::from_ratios(&[0.5, 0.5]);
        assert_eq!(half.evaluate(1.0).hi(), 1.0);
        let third = ExpectedSumCurve::from_ratios(&[1.0 / 3.0, 1.0 / 3.0]);
        assert!((third.evaluate(1.0).lo() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cantor_root() {
        let c = ExpectedSumCurve::from_ratios(&[1.0 / 3.0, 1.0 / 3.0]);
        let sol = solve_alpha(&c, 1e-12).unwrap();
        assert!((sol.alpha - 2f64.ln() / 3f64.ln()).abs() < 1e-11);
        assert!(sol.bracket[0] <= sol.alpha && sol.alpha <= sol.bracket[1]);
        let full = solve_alpha(&ExpectedSumCurve::from_ratios(&[0.5, 0.5]), 1e-9).unwrap();
        assert!((full.alpha - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn single_child_is_subcritical() {
        let c = ExpectedSumCurve::from_ratios(&[0.5]);
        assert!(matches!(solve_alpha(&c, 1e-9), Err(DimensionError::Subcritical(_))));
    }

    #[test]
    fn divergent_tail_is_signalled() {
        let c = ExpectedSumCurve::Series {
            ln_ratios: vec![],
            tail: Some(TailBound::PowerLaw { ln_c: 0.0, exponent: 2.0, first: 2 }),
        };
        assert_eq!(expected_sum_ratios(&c, 0.4).unwrap(), SumValue::Divergent);
        assert!(matches!(expected_sum_ratios(&c, 1.0).unwrap(), SumValue::Bounded { .. }));
        // inf{β : Σ_{n≥2} n^{-2β} ≤ 1} lies just above the divergence point 1/2.
        let sol = solve_alpha(&c, 1e-9).unwrap();
        assert!(sol.alpha > 0.5 && sol.alpha < 1.0);
    }
}
