//! Infinitely branching constructions whose children accumulate at 0.
//!
//! The `n`-th child of a cell has right endpoint `1/n^p` and length `V_n`,
//! where `V_n = q^n inf_{p ∈ [a, b]} (n^-p − (n+1)^-p)` is small enough that
//! the children never overlap for any admissible `p`. The ratios do not
//! depend on `p`; only the placement does.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{
    Brood, Child, ConstructionError, ModelFlags, ModelSpec, OffspringLaw, Omitted, Orientation,
    SimilarityMap, SpawnContext, Tail, TailBound,
};
use crate::dimension::ExpectedSumCurve;
use crate::geometry::Interval;
use crate::rng::NodeRng;

/// `ln(n^-p − (n+1)^-p)`, accurate for large `n`.
pub fn ln_endpoint_gap(n: u64, p: f64) -> f64 {
    let n = n as f64;
    -p * n.ln() + (-(-p * (1.0 / n).ln_1p()).exp_m1()).ln()
}

/// `inf_{p ∈ [a, b]} ln(n^-p − (n+1)^-p)` by endpoint evaluation, a 64-point
/// grid and a golden-section polish around the best grid point.
pub fn ln_inf_gap(n: u64, a: f64, b: f64) -> f64 {
    const GRID: usize = 64;
    let f = |p: f64| ln_endpoint_gap(n, p);
    let step = (b - a) / GRID as f64;
    let mut best_i = 0;
    let mut best = f(a);
    for i in 1..=GRID {
        let p = if i == GRID { b } else { a + step * i as f64 };
        let v = f(p);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (a + step * (best_i as f64 - 1.0)).max(a);
    let mut hi = (a + step * (best_i as f64 + 1.0)).min(b);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    best.min(f1).min(f2)
}

/// Parameters of one infinitely branching family.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Family {
    ln_q: f64,
    p_range: (f64, f64),
}

const EXAMPLE1: Family = Family {
    ln_q: -2.772_588_722_239_781, // ln(1/16)
    p_range: (1.0, 2.0),
};

const EXAMPLE2: Family = Family {
    ln_q: -6.931_471_805_599_453, // ln(1/1024)
    p_range: (1.0, 4.0),
};

/// Cached `ln V_n` for `n = 1..=TABLE_LEN`.
const TABLE_LEN: usize = 12_000;

impl Family {
    fn ln_vn_direct(self, n: u64) -> f64 {
        self.ln_q * n as f64 + ln_inf_gap(n, self.p_range.0, self.p_range.1)
    }

    fn table(self, cell: &'static OnceLock<Vec<f64>>) -> &'static [f64] {
        cell.get_or_init(|| (1..=TABLE_LEN as u64).map(|n| self.ln_vn_direct(n)).collect())
    }
}

static TABLE1: OnceLock<Vec<f64>> = OnceLock::new();
static TABLE2: OnceLock<Vec<f64>> = OnceLock::new();

fn ln_vn(family: Family, n: u64) -> f64 {
    assert!(n >= 1, "children are numbered from 1");
    let table = if family == EXAMPLE1 { family.table(&TABLE1) } else { family.table(&TABLE2) };
    table.get(n as usize - 1).copied().unwrap_or_else(|| family.ln_vn_direct(n))
}

/// `ln V_n = ln(16^-n inf_{p∈[1,2]} (n^-p − (n+1)^-p))`.
pub fn ln_vn_example1(n: u64) -> f64 {
    ln_vn(EXAMPLE1, n)
}

/// `ln V_n = ln(1024^-n inf_{p∈[1,4]} (n^-p − (n+1)^-p))`.
pub fn ln_vn_example2(n: u64) -> f64 {
    ln_vn(EXAMPLE2, n)
}

/// `V_n` of the first example; underflows to 0 beyond `n ≈ 250`.
pub fn vn_example1(n: u64) -> f64 {
    ln_vn_example1(n).exp()
}

/// `V_n` of the second example; underflows to 0 beyond `n ≈ 100`.
pub fn vn_example2(n: u64) -> f64 {
    ln_vn_example2(n).exp()
}

/// `V_n ≤ C q^n` holds with `C = 1/2` for both families, since the gap at
/// `p = 1` is `1/(n(n+1)) ≤ 1/2`.
const LN_TAIL_C: f64 = -std::f64::consts::LN_2;

/// Terms summed exactly in the expected-sum series before the geometric tail.
const SERIES_TERMS: u64 = 64;

fn series_curve(family: Family) -> ExpectedSumCurve {
    ExpectedSumCurve::Series {
        ln_ratios: (1..=SERIES_TERMS).map(|n| ln_vn(family, n)).collect(),
        tail: Some(TailBound::Geometric {
            ln_c: LN_TAIL_C,
            ln_q: family.ln_q,
            first: SERIES_TERMS + 1,
        }),
    }
}

/// Children `[n^-p − V_n, n^-p]` for every `n` that survives truncation.
fn spawn_family(family: Family, p: f64, ctx: &SpawnContext<'_>) -> Brood {
    let mut children = Vec::new();
    let mut n: u64 = 1;
    loop {
        let ln_v = ln_vn(family, n);
        if !ctx.truncation.keeps(ctx.ln_parent_diam + ln_v) {
            break;
        }
        let right = (n as f64).powf(-p);
        let offset = (right - ln_v.exp()).max(0.0);
        children.push(Child {
            digit: n as u32,
            map: SimilarityMap {
                ln_ratio: ln_v,
                offset,
                orientation: Orientation::Preserving,
            },
            present: true,
        });
        n += 1;
    }
    // The diameters decrease in n, so everything from n on is omitted.
    let tail = Tail {
        first_omitted: n as u32,
        omitted: Omitted::Unbounded,
        hull: Interval {
            lo: 0.0,
            hi: (n as f64).powf(-p),
        },
        bound: TailBound::Geometric {
            ln_c: LN_TAIL_C,
            ln_q: family.ln_q,
            first: n,
        },
    };
    Brood {
        children,
        tail: Some(tail),
    }
}

/// How the first example chooses its exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMode {
    Fixed(f64),
    /// Uniform on `[1, 2]`, drawn once per realization.
    Random,
}

#[derive(Debug)]
struct Example1Law {
    mode: PMode,
}

impl OffspringLaw for Example1Law {
    fn draw_globals(&self, rng: &mut NodeRng) -> Vec<f64> {
        match self.mode {
            PMode::Fixed(p) => vec![p],
            PMode::Random => vec![rng.gen_range(1.0..=2.0)],
        }
    }

    fn spawn(&self, ctx: &SpawnContext<'_>, _rng: &mut NodeRng) -> Brood {
        spawn_family(EXAMPLE1, ctx.globals[0], ctx)
    }

    fn max_ratio(&self) -> f64 {
        vn_example1(1)
    }

    fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        Some(series_curve(EXAMPLE1))
    }
}

/// Every cell has children with right endpoints `1/n^p`, `n ≥ 1`, one `p`
/// per realization.
pub fn example1(mode: PMode) -> Result<ModelSpec, ConstructionError> {
    let mut params = BTreeMap::new();
    if let PMode::Fixed(p) = mode {
        if !(1.0..=2.0).contains(&p) {
            return Err(ConstructionError::BadModel(format!("p = {p} outside [1, 2]")));
        }
        params.insert("p".to_string(), p);
    }
    let fixed = matches!(mode, PMode::Fixed(_));
    let flags = ModelFlags {
        deterministic_ratios: true,
        self_similar: fixed,
        finite_branching: false,
        level_dependent: false,
        self_similar_from_level: fixed.then_some(0),
    };
    Ok(ModelSpec::new("example1", params, flags, Arc::new(Example1Law { mode })))
}

/// Exponent used below the first level of the second example.
pub const DEEP_EXPONENT: f64 = 4.0;

#[derive(Debug)]
struct Example2Law;

impl OffspringLaw for Example2Law {
    fn draw_globals(&self, rng: &mut NodeRng) -> Vec<f64> {
        vec![rng.gen_range(1.0..=2.0)]
    }

    fn spawn(&self, ctx: &SpawnContext<'_>, _rng: &mut NodeRng) -> Brood {
        let p = if ctx.level == 0 { ctx.globals[0] } else { DEEP_EXPONENT };
        spawn_family(EXAMPLE2, p, ctx)
    }

    fn max_ratio(&self) -> f64 {
        vn_example2(1)
    }

    fn expected_sum_curve(&self) -> Option<ExpectedSumCurve> {
        Some(series_curve(EXAMPLE2))
    }
}

/// The root's children sit at `1/n^p` with `p` uniform on `[1, 2]`; every
/// deeper cell uses `1/n^4`.
pub fn example2() -> ModelSpec {
    let flags = ModelFlags {
        deterministic_ratios: true,
        self_similar: false,
        finite_branching: false,
        level_dependent: true,
        self_similar_from_level: Some(1),
    };
    let params = BTreeMap::from([("deep_exponent".to_string(), DEEP_EXPONENT)]);
    ModelSpec::new("example2", params, flags, Arc::new(Example2Law))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_values() {
        assert!((vn_example1(1) - 1.0 / 32.0).abs() < 1e-17);
        let v2 = (0.25 - 1.0 / 9.0) / 256.0;
        assert!((vn_example1(2) / v2 - 1.0).abs() < 1e-12);
        assert!((vn_example2(1) - 0.5 / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn gap_formula_is_accurate() {
        for n in [1u64, 7, 300] {
            for p in [1.0, 1.7, 4.0] {
                let direct = (n as f64).powf(-p) - ((n + 1) as f64).powf(-p);
                assert!((ln_endpoint_gap(n, p) - direct.ln()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn inf_matches_dense_grid() {
        for n in [1u64, 2, 3, 5, 10, 40, 1000] {
            for (a, b) in [(1.0, 2.0), (1.0, 4.0)] {
                let dense = (0..=100_000)
                    .map(|i| ln_endpoint_gap(n, a + (b - a) * i as f64 / 100_000.0))
                    .fold(f64::INFINITY, f64::min);
                let fast = ln_inf_gap(n, a, b);
                assert!(fast <= dense + 1e-12, "n={n}: {fast} vs {dense}");
                assert!(fast >= dense - 1e-9);
            }
        }
    }

    #[test]
    fn table_and_direct_agree_beyond_cache() {
        let n = TABLE_LEN as u64;
        assert_eq!(ln_vn_example1(n), EXAMPLE1.ln_vn_direct(n));
        assert!(ln_vn_example1(n + 1) < ln_vn_example1(n));
    }
}
