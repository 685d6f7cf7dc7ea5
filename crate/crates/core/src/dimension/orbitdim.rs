//! Box dimensions of one-step orbits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boxdim::{estimate_set_dimension, DimensionEstimate, SetFit};
use super::DimensionError;
use crate::construction::{orbit_in, Address, Frame, NodeId, Omitted, OrbitTarget, Realization};

/// Box dimension of `O_base(x, 1)`, computed in the base cell's own
/// coordinates.
///
/// A complete finite orbit has dimension exactly 0. A truncated orbit is fit
/// only at scales where the region holding the omitted points changes the
/// covering number by less than `fit.truncation_fraction`.
pub fn estimate_orbit_dimension(
    rz: &Realization,
    base: &Address,
    x: f64,
    fit: &SetFit,
) -> Result<DimensionEstimate, DimensionError> {
    let orbit = orbit_in(rz, base, x, &OrbitTarget::LevelOffset(1), Frame::Local)?;
    if orbit.omitted == Omitted::Finite(0) {
        return Ok(DimensionEstimate::finite(fit.count_type, fit.mode));
    }
    let available = orbit.points.len();
    if available < 4 {
        return Err(DimensionError::OrbitTooSmall(available));
    }
    estimate_set_dimension(&orbit.points, &orbit.omitted_hull, available, fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XIndependence {
    pub x1: f64,
    pub x2: f64,
    pub first: DimensionEstimate,
    pub second: DimensionEstimate,
    /// `|slope1 − slope2|`.
    pub difference: f64,
    /// Three combined standard errors.
    pub allowed: f64,
    pub consistent: bool,
}

/// Compares orbit dimensions from two reference points.
pub fn x_independence_check(
    rz: &Realization,
    base: &Address,
    x1: f64,
    x2: f64,
    fit: &SetFit,
) -> Result<XIndependence, DimensionError> {
    let first = estimate_orbit_dimension(rz, base, x1, fit)?;
    let second = estimate_orbit_dimension(rz, base, x2, fit)?;
    let difference = (first.slope - second.slope).abs();
    let allowed = 3.0 * first.stderr.hypot(second.stderr);
    Ok(XIndependence {
        x1,
        x2,
        consistent: difference <= allowed,
        first,
        second,
        difference,
        allowed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSup {
    pub value: f64,
    pub argmax: Address,
    pub argmax_estimate: DimensionEstimate,
    pub bases_fit: usize,
    /// Bases whose orbit could not be fit, with the reason.
    pub skipped: Vec<(Address, String)>,
}

/// Largest orbit dimension over every nonempty cell above `level_cap`
/// (bases at levels `0..level_cap`).
pub fn estimate_gamma_sup(
    rz: &Realization,
    level_cap: usize,
    x: f64,
    fit: &SetFit,
) -> Result<GammaSup, DimensionError> {
    let cap = level_cap.min(rz.max_depth());
    let bases: Vec<Address> = (0..cap)
        .flat_map(|k| {
            rz.level(k)
                .iter()
                .enumerate()
                .filter(|(_, n)| n.is_alive())
                .map(move |(index, _)| NodeId { level: k, index })
        })
        .map(|id| rz.address(id))
        .collect();
    gamma_sup_over(rz, &bases, x, fit)
}

/// Largest orbit dimension over the given bases.
pub fn gamma_sup_over(
    rz: &Realization,
    bases: &[Address],
    x: f64,
    fit: &SetFit,
) -> Result<GammaSup, DimensionError> {
    let results: Vec<(Address, Result<DimensionEstimate, DimensionError>)> = bases
        .par_iter()
        .map(|b| (b.clone(), estimate_orbit_dimension(rz, b, x, fit)))
        .collect();
    let mut best: Option<(Address, DimensionEstimate)> = None;
    let mut skipped = Vec::new();
    let mut fitted = 0;
    for (base, res) in results {
        match res {
            Ok(est) => {
                fitted += 1;
                if best.as_ref().map_or(true, |(_, b)| est.slope > b.slope) {
                    best = Some((base, est));
                }
            }
            Err(e) => {
                log::debug!("orbit at {base} skipped: {e}");
                skipped.push((base, e.to_string()));
            }
        }
    }
    let (argmax, est) = best.ok_or(DimensionError::NoUsableBase)?;
    Ok(GammaSup {
        value: est.slope,
        argmax,
        argmax_estimate: est,
        bases_fit: fitted,
        skipped,
    })
}
