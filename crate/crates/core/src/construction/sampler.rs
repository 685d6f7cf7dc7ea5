//! Replica sampling of realization statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::law::{log_sum_exp, ModelSpec, Truncation};
use super::realization::{Realization, Semantics};
use crate::rng;

/// A scalar observable of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `S_k`, the number of nonempty level-`k` cells.
    Alive(usize),
    /// `Σ l_σ` over nonempty level-`k` cells.
    DiameterSum(usize),
}

impl Statistic {
    pub fn level(self) -> usize {
        match self {
            Statistic::Alive(k) | Statistic::DiameterSum(k) => k,
        }
    }

    pub fn evaluate(self, rz: &Realization) -> f64 {
        let cells = rz.level(self.level()).iter().filter(|n| n.is_alive());
        match self {
            Statistic::Alive(_) => cells.count() as f64,
            Statistic::DiameterSum(_) => log_sum_exp(cells.map(|n| n.ln_diam)).exp(),
        }
    }
}

/// Samples the statistic over `replicas` realizations. Replica `i` uses
/// seed `replica_seed(seed, i)`; the output is ordered by replica index and
/// does not depend on the thread count.
pub fn sampler_statistic_distribution(
    model: &ModelSpec,
    semantics: Semantics,
    statistic: Statistic,
    truncation: Truncation,
    replicas: u64,
    seed: u64,
) -> Vec<f64> {
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let rz = Realization::sample(
                model,
                rng::replica_seed(seed, i),
                statistic.level(),
                truncation,
                semantics,
            );
            statistic.evaluate(&rz)
        })
        .collect()
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`. Ties are
/// handled by stepping both empirical CDFs past each distinct value.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample KS statistic at level
/// `alpha` for sample sizes `n` and `m`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_identical_samples_is_zero() {
        let a = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(ks_statistic(&a, &a), 0.0);
        assert_eq!(ks_statistic(&[0.0], &[1.0]), 1.0);
        assert!((ks_statistic(&[1.0, 2.0], &[2.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_critical_value_at_one_percent() {
        let c = ks_critical_value(1, 1, 0.01) / 2f64.sqrt();
        assert!((c - 1.6276).abs() < 1e-4);
    }
}
