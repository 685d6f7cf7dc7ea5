//! Box-counting regression.

use serde::{Deserialize, Serialize};

use super::DimensionError;
use crate::geometry::{covering_number, packing_number, CompactSet, Scale};
use crate::stats::linear_fit;

/// Rows with fewer balls than this sit in the saturated regime.
pub const DEFAULT_MIN_COUNT: u64 = 10;
/// Smallest number of rows a fit accepts.
pub const MIN_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeMode {
    /// Running maximum over finer scales, a proxy for the lim sup.
    #[default]
    Upper,
    /// Running minimum, a proxy for the lim inf.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountType {
    #[default]
    Covering,
    Packing,
}

/// Geometric grid from `r_max` down to `r_min` with `per_decade` points per
/// factor of ten; both ends included up to rounding.
pub fn scale_grid(r_max: f64, r_min: f64, per_decade: u32) -> Result<Vec<f64>, DimensionError> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite() && per_decade >= 1) {
        return Err(DimensionError::BadWindow { r_min, r_max });
    }
    let steps = ((r_max / r_min).log10() * f64::from(per_decade) + 1e-9).floor() as i32;
    Ok((0..=steps)
        .map(|i| r_max * 10f64.powf(-f64::from(i) / f64::from(per_decade)))
        .collect())
}

/// Dyadic grid `2^{-k/per_octave}` over `[r_min, r_max]`, largest first.
/// With one point per octave every scale is exactly representable.
pub fn dyadic_grid(r_max: f64, r_min: f64, per_octave: u32) -> Result<Vec<f64>, DimensionError> {
    if !(r_min > 0.0 && r_min < r_max && r_max.is_finite() && per_octave >= 1) {
        return Err(DimensionError::BadWindow { r_min, r_max });
    }
    let m = f64::from(per_octave);
    let first = (-r_max.log2() * m - 1e-9).ceil() as i32;
    let last = (-r_min.log2() * m + 1e-9).floor() as i32;
    Ok((first..=last).map(|k| (-f64::from(k) / m).exp2()).collect())
}

/// Which rows of a count table enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub min_count: u64,
    /// Rows above this count are dominated by the finite resolution of the
    /// sample; typically half the number of points or cells available.
    pub max_count: Option<u64>,
}

impl FitWindow {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        Self {
            r_min,
            r_max,
            min_count: DEFAULT_MIN_COUNT,
            max_count: None,
        }
    }

    /// Caps counts at half of `available`.
    pub fn with_available(mut self, available: usize) -> Self {
        self.max_count = Some(available as u64 / 2);
        self
    }

    fn admits(&self, r: f64, count: u64) -> bool {
        let slack = 1e-12;
        r >= self.r_min * (1.0 - slack)
            && r <= self.r_max * (1.0 + slack)
            && count >= self.min_count
            && self.max_count.map_or(true, |m| count <= m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Least-squares slope of `log count` against `-log r`, clamped to `[0, 1]`.
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Envelope proxy selected by `mode`.
    pub envelope: f64,
    pub mode: EnvelopeMode,
    pub count_type: CountType,
    /// `[r_min, r_max]` of the rows actually used.
    pub fit_range: [f64; 2],
    pub points: usize,
    /// The raw slope left `[0, 1]` and was clamped.
    pub clamped: bool,
    /// Rows inside the requested window were dropped because truncated
    /// offspring could have changed their counts.
    pub window_shrunk: bool,
    /// The input was a complete finite set, whose dimension is exactly 0.
    pub finite_set: bool,
}

impl DimensionEstimate {
    /// The exact estimate for a complete finite set.
    pub fn finite(count_type: CountType, mode: EnvelopeMode) -> Self {
        Self {
            slope: 0.0,
            stderr: 0.0,
            intercept: 0.0,
            r_squared: 1.0,
            envelope: 0.0,
            mode,
            count_type,
            fit_range: [0.0, 0.0],
            points: 0,
            clamped: false,
            window_shrunk: false,
            finite_set: true,
        }
    }
}

/// Regresses `log count` on `-log r` over the rows of `table` admitted by
/// `window`. Rows are `(r, count)`.
pub fn estimate_box_dimension(
    table: &[(f64, u64)],
    window: &FitWindow,
    mode: EnvelopeMode,
    count_type: CountType,
) -> Result<DimensionEstimate, DimensionError> {
    let mut rows: Vec<(f64, u64)> = table
        .iter()
        .copied()
        .filter(|&(r, c)| c > 0 && window.admits(r, c))
        .collect();
    if rows.len() < MIN_ROWS {
        return Err(DimensionError::TooFewRows(rows.len()));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let fit_range = [rows[rows.len() - 1].0, rows[0].0];
    if rows.iter().all(|r| r.1 == rows[0].1) {
        return Ok(DimensionEstimate {
            slope: 0.0,
            stderr: 0.0,
            intercept: (rows[0].1 as f64).ln(),
            r_squared: 1.0,
            envelope: 0.0,
            mode,
            count_type,
            fit_range,
            points: rows.len(),
            clamped: false,
            window_shrunk: false,
            finite_set: false,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| -r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.1 as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(DimensionError::TooFewRows(rows.len()))?;

    // Ratios with the fitted offset removed, coarse to fine.
    let ratios: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| (y - fit.intercept) / x)
        .collect();
    let envelope = if ratios.is_empty() {
        fit.slope
    } else {
        let mut env = vec![0.0; ratios.len()];
        let mut acc = ratios[ratios.len() - 1];
        for i in (0..ratios.len()).rev() {
            acc = match mode {
                EnvelopeMode::Upper => acc.max(ratios[i]),
                EnvelopeMode::Lower => acc.min(ratios[i]),
            };
            env[i] = acc;
        }
        let fine = &env[env.len() / 2..];
        fine.iter().sum::<f64>() / fine.len() as f64
    };

    let clamped = !(0.0..=1.0).contains(&fit.slope);
    if clamped {
        log::warn!("regression slope {} outside [0, 1]; clamped", fit.slope);
    }
    Ok(DimensionEstimate {
        slope: fit.slope.clamp(0.0, 1.0),
        stderr: fit.stderr,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        envelope: envelope.clamp(0.0, 1.0),
        mode,
        count_type,
        fit_range,
        points: rows.len(),
        clamped,
        window_shrunk: false,
        finite_set: false,
    })
}

/// Options for estimating the dimension of a sampled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFit {
    pub scales: Vec<f64>,
    pub window: FitWindow,
    pub mode: EnvelopeMode,
    pub count_type: CountType,
    /// A row is dropped when adding the truncation hull raises `N_r` by this
    /// fraction or more.
    pub truncation_fraction: f64,
}

impl SetFit {
    pub fn new(scales: Vec<f64>, r_min: f64, r_max: f64) -> Self {
        Self {
            scales,
            window: FitWindow::new(r_min, r_max),
            mode: EnvelopeMode::Upper,
            count_type: CountType::Covering,
            truncation_fraction: 0.01,
        }
    }

    /// Dyadic grid `r = 2^-k` over `[r_min, r_max]`.
    pub fn over(r_min: f64, r_max: f64) -> Result<Self, DimensionError> {
        Ok(Self::new(dyadic_grid(r_max, r_min, 1)?, r_min, r_max))
    }

    pub fn with_fraction(mut self, fraction: f64) -> Self {
        self.truncation_fraction = fraction;
        self
    }

    pub fn with_per_decade(mut self, per_decade: u32) -> Result<Self, DimensionError> {
        self.scales = scale_grid(self.window.r_max, self.window.r_min, per_decade)?;
        Ok(self)
    }
}

/// Box dimension of `set`, a sample of `available` points or cells from a
/// set whose unsampled part lies inside `omitted_hull`.
pub fn estimate_set_dimension(
    set: &CompactSet,
    omitted_hull: &CompactSet,
    available: usize,
    fit: &SetFit,
) -> Result<DimensionEstimate, DimensionError> {
    let window = fit.window.with_available(available);
    let full = set.union(omitted_hull);
    let mut table = Vec::with_capacity(fit.scales.len());
    let mut shrunk = false;
    for &r in &fit.scales {
        let scale = Scale::new(r).map_err(|_| DimensionError::BadWindow { r_min: r, r_max: r })?;
        let n = covering_number(set, scale);
        if !omitted_hull.is_empty() && window.admits(r, n) {
            let n_full = covering_number(&full, scale);
            if (n_full - n) as f64 >= fit.truncation_fraction * n as f64 {
                shrunk = true;
                continue;
            }
        }
        let count = match fit.count_type {
            CountType::Covering => n,
            CountType::Packing => packing_number(set, scale),
        };
        table.push((r, count));
    }
    let mut est = estimate_box_dimension(&table, &window, fit.mode, fit.count_type)?;
    est.window_shrunk = shrunk;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_power_law() {
        let table: Vec<(f64, u64)> = (8..=40)
            .map(|k| {
                let r = 2f64.powi(-k);
                (r, r.powf(-0.5).round() as u64)
            })
            .collect();
        let w = FitWindow::new(2f64.powi(-40), 2f64.powi(-8));
        let est = estimate_box_dimension(&table, &w, EnvelopeMode::Upper, CountType::Covering).unwrap();
        assert!((est.slope - 0.5).abs() < 0.01);
        assert!((est.envelope - 0.5).abs() < 0.01);
    }

    #[test]
    fn constant_counts_give_zero() {
        let table: Vec<(f64, u64)> = (1..=6).map(|k| (10f64.powi(-k), 12)).collect();
        let est = estimate_box_dimension(&table, &FitWindow::new(1e-6, 0.1), EnvelopeMode::Lower, CountType::Covering)
            .unwrap();
        assert_eq!((est.slope, est.stderr), (0.0, 0.0));
    }

    #[test]
    fn too_few_rows() {
        let table = [(0.1, 10), (0.01, 100), (0.001, 1000)];
        assert!(matches!(
            estimate_box_dimension(&table, &FitWindow::new(1e-3, 0.1), EnvelopeMode::Upper, CountType::Covering),
            Err(DimensionError::TooFewRows(3))
        ));
    }

    #[test]
    fn dyadic_grid_is_exact() {
        let g = dyadic_grid(0.1, 1e-3, 1).unwrap();
        assert_eq!(g, vec![0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125]);
        assert_eq!(dyadic_grid(0.5, 0.125, 2).unwrap().len(), 5);
    }

    #[test]
    fn grid_spans_the_window() {
        let g = scale_grid(1e-1, 1e-6, 4).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[20] / 1e-6 - 1.0).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }
}
