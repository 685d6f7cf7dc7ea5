//! Random recursive constructions on `[0, 1]`.

mod address;
mod law;
mod orbit;
mod realization;
mod sampler;
mod stopping;
mod validate;

use thiserror::Error;

pub use address::{is_antichain, Address, Antichain};
pub use law::{
    Brood, Child, ModelFlags, ModelSpec, OffspringLaw, Omitted, Orientation, SimilarityMap,
    SpawnContext, Tail, TailBound, Truncation,
};
pub(crate) use law::log_sum_exp;
pub use orbit::{orbit, orbit_in, Frame, Orbit, OrbitTarget};
pub use realization::{
    LevelTruncation, Node, NodeExport, NodeId, Realization, RealizationExport, RealizationStats,
    Semantics,
};
pub use sampler::{ks_critical_value, ks_statistic, sampler_statistic_distribution, Statistic};
pub use stopping::{stopping_set, OmittedBrood, StoppingSet};
pub use validate::{neighborhood_bound_probe, osc_of_intervals, validate_osc, OscReport, OSC_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("invalid similarity map: {0}")]
    BadMap(String),
    #[error("truncation threshold must be positive and finite, got {0}")]
    BadTruncation(f64),
    #[error("level {level} is beyond the stored depth {max_depth}")]
    BeyondDepth { level: usize, max_depth: usize },
    #[error("address {0} is not in the realization")]
    UnknownAddress(Address),
    #[error("empty cell has no orbit: {0}")]
    DeadBase(Address),
    #[error("point {0} is outside [0, 1]")]
    PointOutside(f64),
    #[error("realization too shallow to resolve the stopping set; unresolved: {}", list(.0))]
    Unresolved(Vec<Address>),
    #[error("q must be at least 1")]
    BadDepthOffset,
    #[error("shrink factor must lie in (0, 1], got {0}")]
    BadShrink(f64),
    #[error("no surviving realization in {0} attempts")]
    NoSurvivor(u64),
    #[error("invalid model: {0}")]
    BadModel(String),
}

fn list(addresses: &[Address]) -> String {
    const SHOWN: usize = 8;
    let mut s: Vec<String> = addresses.iter().take(SHOWN).map(|a| a.to_string()).collect();
    if addresses.len() > SHOWN {
        s.push(format!("... ({} total)", addresses.len()));
    }
    s.join(", ")
}
