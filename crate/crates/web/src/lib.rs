//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string,
//! so the page needs no generated type glue beyond `wasm-bindgen`'s.

use std::collections::BTreeMap;

use fracdim::construction::{Realization, Semantics, Truncation};
use fracdim::dimension::{estimate_set_dimension, solve_alpha, DimensionEstimate, SetFit};
use fracdim::geometry::{count_table, CountRow};
use fracdim::models::{self, orbit_set, orbit_set_hull};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Most intervals returned per level; deeper levels of infinitely
/// branching models are clipped to the largest cells.
pub const MAX_DRAWN: usize = 4000;

fn parse_params(json: &str) -> Result<BTreeMap<String, f64>, String> {
    if json.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    serde_json::from_str(json).map_err(|e| format!("parameters: {e}"))
}

fn realization(model: &str, params: &str, seed: u32, depth: u32, log10_eps: f64) -> Result<Realization, String> {
    if depth > 16 {
        return Err(format!("depth {depth} is too deep for the demo (max 16)"));
    }
    let spec = models::build(model, &parse_params(params)?).map_err(|e| e.to_string())?;
    let trunc = Truncation::from_log10(log10_eps).map_err(|e| e.to_string())?;
    Ok(Realization::sample(&spec, u64::from(seed), depth as usize, trunc, Semantics::Recursive))
}

#[derive(Serialize)]
struct Level {
    alive: usize,
    clipped: bool,
    intervals: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Levels {
    globals: Vec<f64>,
    extinct: bool,
    levels: Vec<Level>,
}

/// Nonempty cells of every level of one realization.
pub fn levels_json(model: &str, params: &str, seed: u32, depth: u32, log10_eps: f64) -> Result<String, String> {
    let rz = realization(model, params, seed, depth, log10_eps)?;
    let levels = (0..=rz.max_depth())
        .map(|k| {
            let mut alive: Vec<_> = rz.level(k).iter().filter(|n| n.is_alive()).collect();
            let count = alive.len();
            if count > MAX_DRAWN {
                alive.sort_by(|a, b| b.ln_diam.total_cmp(&a.ln_diam));
                alive.truncate(MAX_DRAWN);
            }
            let mut intervals: Vec<[f64; 2]> = alive.iter().map(|n| [n.interval.lo, n.interval.hi]).collect();
            intervals.sort_by(|a, b| a[0].total_cmp(&b[0]));
            Level {
                alive: count,
                clipped: count > MAX_DRAWN,
                intervals,
            }
        })
        .collect();
    let out = Levels {
        globals: rz.globals().to_vec(),
        extinct: rz.is_extinct(),
        levels,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct BoxCounts {
    cells: usize,
    rows: Vec<CountRow>,
    estimate: DimensionEstimate,
}

/// Count table and slope for the deepest level union, or for `{1/n^p}` when
/// `model` is `orbit_set`.
///
/// Scales where the truncated offspring would raise `N_r` by `tail_fraction`
/// or more are left out of the fit.
#[allow(clippy::too_many_arguments)]
pub fn box_counts_json(
    model: &str,
    params: &str,
    seed: u32,
    depth: u32,
    log10_eps: f64,
    r_min: f64,
    r_max: f64,
    tail_fraction: f64,
) -> Result<String, String> {
    if !(tail_fraction > 0.0) {
        return Err(format!("tail fraction must be positive, got {tail_fraction}"));
    }
    let fit = SetFit::over(r_min, r_max)
        .map_err(|e| e.to_string())?
        .with_fraction(tail_fraction);
    let (set, hull, cells) = if model == "orbit_set" {
        let p = parse_params(params)?.get("p").copied().unwrap_or(1.0);
        let set = orbit_set(p, r_min * 1e-3).map_err(|e| e.to_string())?;
        let (hull, n) = (orbit_set_hull(&set), set.len());
        (set, hull, n)
    } else {
        let rz = realization(model, params, seed, depth, log10_eps)?;
        if rz.is_extinct() {
            return Err("this realization died out; try another seed".into());
        }
        let k = rz.max_depth();
        let set = rz.level_union(k, true).map_err(|e| e.to_string())?;
        let cells = rz.level(k).iter().filter(|n| n.is_alive()).count();
        (set, rz.tail_hulls(k), cells)
    };
    let estimate = estimate_set_dimension(&set, &hull, cells, &fit).map_err(|e| e.to_string())?;
    let rows = count_table(&set, &fit.scales).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&BoxCounts { cells, rows, estimate }).expect("serializable"))
}

#[derive(Serialize)]
struct Curve {
    betas: Vec<f64>,
    lo: Vec<Option<f64>>,
    hi: Vec<Option<f64>>,
    alpha: Option<f64>,
    bracket: Option<[f64; 2]>,
    note: Option<String>,
}

/// The expected sum of ratio powers on a grid of exponents, with its root.
pub fn alpha_curve_json(model: &str, params: &str, beta_min: f64, beta_max: f64, points: u32) -> Result<String, String> {
    if !(beta_min > 0.0 && beta_min < beta_max && points >= 2 && points <= 2000) {
        return Err("need 0 < beta_min < beta_max and 2..=2000 points".into());
    }
    let spec = models::build(model, &parse_params(params)?).map_err(|e| e.to_string())?;
    let curve = spec
        .expected_sum_curve()
        .ok_or_else(|| format!("model {model} has no closed-form curve"))?;
    let betas: Vec<f64> = (0..points)
        .map(|i| beta_min + (beta_max - beta_min) * f64::from(i) / f64::from(points - 1))
        .collect();
    let finite = |v: f64| v.is_finite().then_some(v);
    let values: Vec<_> = betas.iter().map(|&b| curve.evaluate(b)).collect();
    let (alpha, bracket, note) = match solve_alpha(&curve, 1e-9) {
        Ok(s) => (Some(s.alpha), Some(s.bracket), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let out = Curve {
        lo: values.iter().map(|v| finite(v.lo())).collect(),
        hi: values.iter().map(|v| finite(v.hi())).collect(),
        betas,
        alpha,
        bracket,
        note,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[wasm_bindgen]
pub fn levels(model: &str, params: &str, seed: u32, depth: u32, log10_eps: f64) -> Result<String, JsValue> {
    levels_json(model, params, seed, depth, log10_eps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn box_counts(
    model: &str,
    params: &str,
    seed: u32,
    depth: u32,
    log10_eps: f64,
    r_min: f64,
    r_max: f64,
    tail_fraction: f64,
) -> Result<String, JsValue> {
    box_counts_json(model, params, seed, depth, log10_eps, r_min, r_max, tail_fraction).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn alpha_curve(model: &str, params: &str, beta_min: f64, beta_max: f64, points: u32) -> Result<String, JsValue> {
    alpha_curve_json(model, params, beta_min, beta_max, points).map_err(|e| JsValue::from_str(&e))
}
