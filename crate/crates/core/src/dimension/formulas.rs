//! Closed-form dimension formulas and the statistical checks built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alpha::{solve_alpha, AlphaSolution, ExpectedSumCurve, SumValue, MONTE_CARLO_SAMPLES};
use super::boxdim::{estimate_set_dimension, DimensionEstimate, SetFit};
use super::DimensionError;
use crate::construction::{stopping_set, Address, ModelSpec, Realization, Semantics, Truncation};
use crate::geometry::CompactSet;
use crate::rng;
use crate::stats::mean_and_stderr;

/// Smallest admissible gap between the moment exponent and `α`.
pub const MOMENT_MARGIN: f64 = 0.02;

fn check_unit(name: &'static str, v: f64) -> Result<(), DimensionError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(DimensionError::OutOfUnit { name, value: v })
    }
}

/// `max{α, γ}`: the upper Minkowski dimension from the Hausdorff dimension
/// and the upper orbit dimension (or the lower one from the lower).
pub fn eval_mink(alpha: f64, gamma: f64) -> Result<f64, DimensionError> {
    check_unit("alpha", alpha)?;
    check_unit("gamma", gamma)?;
    Ok(alpha.max(gamma))
}

/// Packing dimension of a self-similar construction,
/// `max{α, ess sup orbit dimension}`; `None` when the model is not
/// self-similar and no formula is known.
pub fn eval_packsim(alpha: f64, ess_sup_orbit_dim: f64, self_similar: bool) -> Option<f64> {
    self_similar.then(|| alpha.max(ess_sup_orbit_dim))
}

/// The exact curve of a model, or a Monte Carlo one when no closed form
/// exists.
pub fn model_curve(model: &ModelSpec, seed: u64, truncation: Truncation) -> ExpectedSumCurve {
    model
        .expected_sum_curve()
        .unwrap_or_else(|| ExpectedSumCurve::monte_carlo(model, MONTE_CARLO_SAMPLES, seed, truncation))
}

/// Which antichain is summed in the moment test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntichainRule {
    /// First descendants at depth `≥ q` with diameter below `shrink`.
    StoppingSet { shrink: f64 },
}

impl Default for AntichainRule {
    fn default() -> Self {
        AntichainRule::StoppingSet { shrink: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub model: String,
    pub t: f64,
    pub q: usize,
    pub alpha: f64,
    /// `E[Σ T_i^t]`, upper end of its error interval.
    pub p: f64,
    /// `p^q / (1 − p)`.
    pub bound: f64,
    pub mean: f64,
    pub stderr: f64,
    /// Mean bound on what truncation removed, already included in `mean`.
    pub omitted_mean: f64,
    pub replicas: u64,
    pub pass: bool,
}

/// Tree depth at which every path has entered the stopping set.
pub fn stopping_depth(model: &ModelSpec, q: usize, shrink: f64) -> usize {
    let ratio = model.law().max_ratio();
    let needed = (shrink.ln() / ratio.ln()).floor() as usize + 1;
    q.max(needed)
}

/// Checks `E[Σ_{τ∈Γ} l_τ^t] ≤ p^q / (1 − p)` by sampling.
#[allow(clippy::too_many_arguments)]
pub fn antichain_moment_test(
    model: &ModelSpec,
    t: f64,
    q: usize,
    replicas: u64,
    seed: u64,
    rule: AntichainRule,
    truncation: Truncation,
) -> Result<MomentReport, DimensionError> {
    let curve = model_curve(model, seed, truncation);
    let alpha = solve_alpha(&curve, curve.default_tolerance())?;
    if t < alpha.bracket[1] + MOMENT_MARGIN {
        return Err(DimensionError::HypothesisViolated(format!(
            "t = {t} is below alpha + {MOMENT_MARGIN} = {}",
            alpha.bracket[1] + MOMENT_MARGIN
        )));
    }
    let p = match curve.evaluate(t) {
        SumValue::Bounded { hi, .. } => hi,
        SumValue::Divergent => f64::INFINITY,
    };
    if !(p > 0.0 && p < 1.0) {
        return Err(DimensionError::HypothesisViolated(format!("p = {p} is not in (0, 1)")));
    }
    let AntichainRule::StoppingSet { shrink } = rule;
    let depth = stopping_depth(model, q, shrink);
    let samples: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let rz = Realization::sample(model, rng::replica_seed(seed, i), depth, truncation, Semantics::Recursive);
            let gamma = stopping_set(&rz, &Address::root(), q, shrink)?;
            let omitted = gamma.omitted_bound(t, p, q);
            Ok((gamma.power_sum(t) + omitted, omitted))
        })
        .collect::<Result<_, DimensionError>>()?;
    let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let (mean, stderr) = mean_and_stderr(&values);
    let omitted_mean = samples.iter().map(|s| s.1).sum::<f64>() / replicas as f64;
    let bound = p.powi(q as i32) / (1.0 - p);
    Ok(MomentReport {
        model: model.name().to_string(),
        t,
        q,
        alpha: alpha.alpha,
        p,
        bound,
        mean,
        stderr,
        omitted_mean,
        replicas,
        pass: mean <= bound + 3.0 * stderr,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub model: String,
    pub alpha: AlphaSolution,
    pub seeds: Vec<u64>,
    pub estimates: Vec<DimensionEstimate>,
    pub mean_slope: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// For finitely branching models, the box dimension of a deep level union
/// should match `α`. Averages the estimate over the given seeds, each
/// conditioned on survival to `depth`.
pub fn finite_coincidence_check(
    model: &ModelSpec,
    seeds: &[u64],
    depth: usize,
    fit: &SetFit,
    tolerance: f64,
) -> Result<CoincidenceReport, DimensionError> {
    if !model.flags().finite_branching {
        return Err(DimensionError::NotApplicable(format!(
            "{} has infinitely many offspring",
            model.name()
        )));
    }
    let truncation = Truncation::none();
    let seed0 = seeds.first().copied().unwrap_or(0);
    let curve = model_curve(model, seed0, truncation);
    let alpha = solve_alpha(&curve, curve.default_tolerance())?;
    let estimates = seeds
        .par_iter()
        .map(|&s| {
            let rz = Realization::sample_surviving(model, s, depth, truncation, Semantics::Recursive, 1000)?;
            let union = rz.level_union(depth, true)?;
            let cells = rz.level(depth).iter().filter(|n| n.is_alive()).count();
            estimate_set_dimension(&union, &CompactSet::empty(), cells, fit)
        })
        .collect::<Result<Vec<_>, DimensionError>>()?;
    let mean_slope = estimates.iter().map(|e| e.slope).sum::<f64>() / estimates.len().max(1) as f64;
    Ok(CoincidenceReport {
        model: model.name().to_string(),
        pass: (mean_slope - alpha.alpha).abs() <= tolerance,
        alpha,
        seeds: seeds.to_vec(),
        estimates,
        mean_slope,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mink_is_a_max() {
        assert_eq!(eval_mink(0.2, 0.5).unwrap(), 0.5);
        assert_eq!(eval_mink(0.3, 0.3).unwrap(), 0.3);
        assert!(eval_mink(1.2, 0.5).is_err());
    }

    #[test]
    fn packsim_needs_self_similarity() {
        assert_eq!(eval_packsim(0.125, 0.2, true), Some(0.2));
        assert_eq!(eval_packsim(0.3, 0.3, true), Some(0.3));
        assert_eq!(eval_packsim(0.3, 0.4, false), None);
    }
}
