//! Random recursive constructions on the unit interval and their dimensions.
//!
//! The crate samples random Cantor-like sets cell by cell, computes exact
//! covering and packing numbers and Hausdorff distances for finite unions of
//! intervals, and estimates Hausdorff, Minkowski and packing dimensions.
//!
//! ```
//! use fracdim::dimension::{solve_alpha, ExpectedSumCurve};
//!
//! let curve = ExpectedSumCurve::from_ratios(&[1.0 / 3.0, 1.0 / 3.0]);
//! let sol = solve_alpha(&curve, 1e-9).unwrap();
//! assert!((sol.alpha - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
//! ```

pub mod construction;
pub mod dimension;
pub mod geometry;
pub mod models;
pub mod rng;
pub mod stats;
pub mod verify;
