//! Built-in construction models.

mod examples;
mod simple;

use std::collections::BTreeMap;

use crate::construction::{ConstructionError, ModelSpec};
use crate::geometry::{CompactSet, Interval};

pub use examples::{
    example1, example2, ln_endpoint_gap, ln_inf_gap, ln_vn_example1, ln_vn_example2, vn_example1,
    vn_example2, PMode, DEEP_EXPONENT,
};
pub use simple::{cantor, homogeneous_random, RatioLaw};

/// `{1/n^p}` for every `n` whose gap to its predecessor is at least
/// `cutoff`, together with the accumulation point 0.
pub fn orbit_set(p: f64, cutoff: f64) -> Result<CompactSet, ConstructionError> {
    if !(p > 0.0 && cutoff > 0.0 && p.is_finite()) {
        return Err(ConstructionError::BadModel(format!(
            "orbit_set needs p > 0 and cutoff > 0, got p = {p}, cutoff = {cutoff}"
        )));
    }
    let mut points = vec![0.0, 1.0];
    let mut n: u64 = 1;
    while ln_endpoint_gap(n, p) >= cutoff.ln() {
        n += 1;
        points.push((n as f64).powf(-p));
    }
    Ok(CompactSet::from_valid(points.into_iter().map(Interval::point).collect()))
}

/// Region of `[0, 1]` holding the points [`orbit_set`] leaves out.
pub fn orbit_set_hull(set: &CompactSet) -> CompactSet {
    let next = set.intervals().get(1).map_or(0.0, |iv| iv.lo);
    CompactSet::from_valid(vec![Interval { lo: 0.0, hi: next }])
}

/// Names accepted by [`build`].
pub const MODEL_NAMES: [&str; 4] = ["cantor", "homogeneous", "example1", "example2"];

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64, ConstructionError> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| ConstructionError::BadModel(format!("missing parameter {key:?}")))
}

fn arity(params: &BTreeMap<String, f64>) -> Result<u32, ConstructionError> {
    let a = param(params, "arity", Some(2.0))?;
    if a.fract() != 0.0 || !(1.0..=1e6).contains(&a) {
        return Err(ConstructionError::BadModel(format!("arity must be a positive integer, got {a}")));
    }
    Ok(a as u32)
}

/// Looks up a model by name.
///
/// | name | parameters |
/// |---|---|
/// | `cantor` | `ratio` (1/3), `arity` (2) |
/// | `homogeneous` | `lo`, `hi` (0.2, 0.3) or `ratio`; `arity` (2); `keep_prob` (1) |
/// | `example1` | `p` in `[1, 2]`; random per realization when absent |
/// | `example2` | none |
pub fn build(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelSpec, ConstructionError> {
    let allowed: &[&str] = match name {
        "cantor" => &["ratio", "arity"],
        "homogeneous" => &["lo", "hi", "ratio", "arity", "keep_prob"],
        "example1" => &["p"],
        "example2" => &[],
        other => {
            return Err(ConstructionError::BadModel(format!(
                "unknown model {other:?}; expected one of {MODEL_NAMES:?}"
            )))
        }
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(ConstructionError::BadModel(format!("model {name} has no parameter {k:?}")));
    }
    match name {
        "cantor" => cantor(param(params, "ratio", Some(1.0 / 3.0))?, arity(params)?),
        "homogeneous" => {
            let law = match params.get("ratio") {
                Some(&r) => RatioLaw::Fixed(r),
                None => RatioLaw::Uniform {
                    lo: param(params, "lo", Some(0.2))?,
                    hi: param(params, "hi", Some(0.3))?,
                },
            };
            homogeneous_random(law, arity(params)?, param(params, "keep_prob", Some(1.0))?)
        }
        "example1" => example1(params.get("p").map_or(PMode::Random, |&p| PMode::Fixed(p))),
        _ => Ok(example2()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbit_set_sizes() {
        let s = orbit_set(1.0, 1e-7).unwrap();
        assert_eq!(s.len(), 3163);
        assert_eq!(s.intervals().last().unwrap().hi, 1.0);
        assert_eq!(s.intervals()[0].lo, 0.0);
    }

    #[test]
    fn lookup_rejects_unknown_names_and_keys() {
        assert!(build("koch", &BTreeMap::new()).is_err());
        let bad = BTreeMap::from([("ratio".to_string(), 0.3)]);
        assert!(build("example2", &bad).is_err());
        assert_eq!(build("cantor", &BTreeMap::new()).unwrap().name(), "cantor");
    }
}
