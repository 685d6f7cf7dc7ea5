//! Finitely branching models: deterministic Cantor sets and random
//! homogeneous Cantor sets.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{
    Brood, Child, ConstructionError, ModelFlags, ModelSpec, OffspringLaw, Orientation, SimilarityMap,
    SpawnContext,
};
use crate::dimension::ExpectedSumCurve;
use crate::rng::NodeRng;

/// Children with the given ratios, packed left to right with equal gaps;
/// the first touches 0 and the last touches 1.
fn pack_left_to_right(ratios: &[f64]) -> Vec<SimilarityMap> {
    let n = ratios.len();
    let total: f64 = ratios.iter().sum();
    let gap = if n > 1 { (1.0 - total).max(0.0) / (n - 1) as f64 } else { 0.0 };
    let mut offset = 0.0_f64;
    ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            // Rounding may push the last child a hair past 1.
            let o = if i + 1 == n && n > 1 { (1.0 - r).max(0.0) } else { offset.min(1.0 - r) };
            offset += r + gap;
            SimilarityMap {
                ln_ratio: r.ln(),
                offset: o,
                orientation: Orientation::Preserving,
            }
        })
        .collect()
}

#[derive(Debug)]
struct CantorLaw {
    ratio: f64,
    arity: u32,
}

impl OffspringLaw for CantorLaw {
    fn spawn(&self, ctx: &SpawnContext<'_>, _rng: &mut NodeRng) -> Brood {
        let maps = pack_left_to_right(&vec![self.ratio; self.arity as usize]);
        let candidates = maps
            .into_iter()
            .zip(1..)
            .map(|(map, digit)| Child { digit, map, present: true })
            .collect();
        Brood::truncate_finite(candidates, ctx)
    }

    fn max_ratio(&self) -> f64 {
        self.ratio
    }

    fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        Some(ExpectedSumCurve::from_ratios(&vec![self.ratio; self.arity as usize]))
    }
}

/// `arity` equally spaced children of the given ratio.
pub fn cantor(ratio: f64, arity: u32) -> Result<ModelSpec, ConstructionError> {
    if !(ratio > 0.0 && ratio < 1.0) || arity == 0 {
        return Err(ConstructionError::BadModel(format!(
            "cantor needs ratio in (0, 1) and arity >= 1, got ratio {ratio}, arity {arity}"
        )));
    }
    if ratio * f64::from(arity) > 1.0 {
        return Err(ConstructionError::BadModel(format!(
            "{arity} children of ratio {ratio} cannot have disjoint interiors"
        )));
    }
    let params = BTreeMap::from([("ratio".to_string(), ratio), ("arity".to_string(), f64::from(arity))]);
    let flags = ModelFlags {
        deterministic_ratios: true,
        self_similar: true,
        finite_branching: true,
        level_dependent: false,
        self_similar_from_level: Some(0),
    };
    Ok(ModelSpec::new("cantor", params, flags, Arc::new(CantorLaw { ratio, arity })))
}

/// Distribution of a single reduction ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioLaw {
    Uniform { lo: f64, hi: f64 },
    Fixed(f64),
}

impl RatioLaw {
    fn max(self) -> f64 {
        match self {
            RatioLaw::Uniform { hi, .. } => hi,
            RatioLaw::Fixed(r) => r,
        }
    }

    fn draw(self, rng: &mut NodeRng) -> f64 {
        match self {
            RatioLaw::Uniform { lo, hi } => rng.gen_range(lo..=hi),
            RatioLaw::Fixed(r) => r,
        }
    }

    /// `E[U^β]`.
    fn moment(self, beta: f64) -> f64 {
        match self {
            RatioLaw::Uniform { lo, hi } if hi > lo => {
                (hi.powf(beta + 1.0) - lo.powf(beta + 1.0)) / ((beta + 1.0) * (hi - lo))
            }
            RatioLaw::Uniform { lo, .. } => lo.powf(beta),
            RatioLaw::Fixed(r) => r.powf(beta),
        }
    }
}

#[derive(Debug)]
struct HomogeneousLaw {
    ratios: RatioLaw,
    arity: u32,
    keep_prob: f64,
}

impl OffspringLaw for HomogeneousLaw {
    fn spawn(&self, ctx: &SpawnContext<'_>, rng: &mut NodeRng) -> Brood {
        let ratios: Vec<f64> = (0..self.arity).map(|_| self.ratios.draw(rng)).collect();
        let present: Vec<bool> = (0..self.arity)
            .map(|_| self.keep_prob >= 1.0 || rng.gen::<f64>() < self.keep_prob)
            .collect();
        let candidates = pack_left_to_right(&ratios)
            .into_iter()
            .zip(present)
            .zip(1..)
            .map(|((map, present), digit)| Child { digit, map, present })
            .collect();
        Brood::truncate_finite(candidates, ctx)
    }

    fn max_ratio(&self) -> f64 {
        self.ratios.max()
    }

    fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        let (law, mean_children) = (self.ratios, f64::from(self.arity) * self.keep_prob);
        Some(ExpectedSumCurve::Analytic {
            label: format!("{mean_children} * E[U^beta], U ~ {law:?}"),
            f: Arc::new(move |beta| mean_children * law.moment(beta)),
        })
    }
}

/// Each cell draws `arity` i.i.d. ratios and keeps each child independently
/// with probability `keep_prob`; children are packed left to right.
///
/// With `keep_prob < 1` the number of nonempty offspring is random and the
/// construction can die out.
pub fn homogeneous_random(ratios: RatioLaw, arity: u32, keep_prob: f64) -> Result<ModelSpec, ConstructionError> {
    let ok_law = match ratios {
        RatioLaw::Uniform { lo, hi } => lo > 0.0 && lo <= hi && hi < 1.0,
        RatioLaw::Fixed(r) => r > 0.0 && r < 1.0,
    };
    if !ok_law || arity == 0 {
        return Err(ConstructionError::BadModel(format!("invalid ratio law {ratios:?} or arity {arity}")));
    }
    if ratios.max() * f64::from(arity) > 1.0 {
        return Err(ConstructionError::BadModel(format!(
            "{arity} children with ratios up to {} cannot have disjoint interiors",
            ratios.max()
        )));
    }
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(ConstructionError::BadModel(format!("keep probability {keep_prob} not in (0, 1]")));
    }
    let mut params = BTreeMap::from([
        ("arity".to_string(), f64::from(arity)),
        ("keep_prob".to_string(), keep_prob),
    ]);
    match ratios {
        RatioLaw::Uniform { lo, hi } => {
            params.insert("lo".into(), lo);
            params.insert("hi".into(), hi);
        }
        RatioLaw::Fixed(r) => {
            params.insert("ratio".into(), r);
        }
    }
    let flags = ModelFlags {
        deterministic_ratios: matches!(ratios, RatioLaw::Fixed(_)) && keep_prob >= 1.0,
        self_similar: true,
        finite_branching: true,
        level_dependent: false,
        self_similar_from_level: Some(0),
    };
    let law = HomogeneousLaw { ratios, arity, keep_prob };
    Ok(ModelSpec::new("homogeneous", params, flags, Arc::new(law)))
}
