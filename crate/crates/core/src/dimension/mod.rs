//! Dimension computations: the Hausdorff exponent, box-counting
//! regression, orbit dimensions and the formulas combining them.

mod alpha;
mod boxdim;
mod orbitdim;
mod formulas;

use thiserror::Error;

use crate::construction::ConstructionError;

pub use alpha::{
    expected_sum_ratios, solve_alpha, AlphaSolution, CurveMode, ExpectedSumCurve, SumValue, BETA_MIN,
    EXACT_TOLERANCE, MONTE_CARLO_SAMPLES, MONTE_CARLO_TOLERANCE,
};
pub use boxdim::{
    dyadic_grid, estimate_box_dimension, estimate_set_dimension, scale_grid, CountType, DimensionEstimate,
    EnvelopeMode, FitWindow, SetFit, DEFAULT_MIN_COUNT, MIN_ROWS,
};
pub use orbitdim::{
    estimate_gamma_sup, estimate_orbit_dimension, gamma_sup_over, x_independence_check, GammaSup,
    XIndependence,
};
pub use formulas::{
    antichain_moment_test, eval_mink, eval_packsim, finite_coincidence_check, model_curve,
    stopping_depth, AntichainRule, CoincidenceReport, MomentReport, MOMENT_MARGIN,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimensionError {
    #[error("exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("subcritical or degenerate: expected sum at beta -> 0 is {0} <= 1")]
    Subcritical(f64),
    #[error("no bracket on (0, 1]: expected sum at beta = 1 is {0} > 1")]
    NoBracket(f64),
    #[error("fewer than 4 usable rows in the fit window ({0})")]
    TooFewRows(usize),
    #[error("invalid scale window [{r_min}, {r_max}]")]
    BadWindow { r_min: f64, r_max: f64 },
    #[error("orbit too small ({0} points)")]
    OrbitTooSmall(usize),
    #[error("no base produced a usable orbit")]
    NoUsableBase,
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnit { name: &'static str, value: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}
