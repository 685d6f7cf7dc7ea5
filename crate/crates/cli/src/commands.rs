use std::io::Write;
use std::path::Path;

use fracdim::construction::{Address, ModelSpec, Realization};
use fracdim::dimension::{
    estimate_gamma_sup, estimate_orbit_dimension, estimate_set_dimension, model_curve, AlphaSolution,
    CountType, DimensionEstimate, EnvelopeMode, GammaSup, SetFit, SumValue,
};
use fracdim::geometry::{count_table, write_count_csv, CompactSet, CountRow};
use fracdim::models::{orbit_set, orbit_set_hull};
use fracdim::rng::replica_seed;
use fracdim::stats::mean_and_stderr;
use fracdim::verify::{run_check, Fault, Plan, Suite, CHECKS};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Settings, Source, SEED_ENV};
use crate::CliError;

/// Attempts allowed when conditioning on survival.
const SURVIVAL_ATTEMPTS: u64 = 1000;

pub fn default_seed(flag: Option<u64>) -> Result<u64, CliError> {
    match flag {
        Some(s) => Ok(s),
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("{SEED_ENV}={v:?}: {e}"))),
            Err(_) => Ok(0),
        },
    }
}

fn emit<T: Serialize>(settings_output: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    match settings_output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Io("<stdout>".into(), e))
        }
    }
}

fn sample(s: &Settings, model: &ModelSpec, seed: u64) -> Result<Realization, CliError> {
    let trunc = s.truncation()?;
    Ok(if s.condition_on_survival {
        Realization::sample_surviving(model, seed, s.max_depth, trunc, s.semantics, SURVIVAL_ATTEMPTS)?
    } else {
        Realization::sample(model, seed, s.max_depth, trunc, s.semantics)
    })
}

#[derive(Serialize)]
struct AlphaReport<'a> {
    command: &'static str,
    settings: &'a Settings,
    solution: AlphaSolution,
    sum_at_alpha: SumValue,
}

pub fn solve_alpha(s: &Settings, tol: f64) -> Result<(), CliError> {
    let model = s.model_spec()?;
    let curve = model_curve(&model, s.seed, s.truncation()?);
    let solution = fracdim::dimension::solve_alpha(&curve, tol)?;
    let report = AlphaReport {
        command: "solve-alpha",
        settings: s,
        sum_at_alpha: curve.evaluate(solution.alpha),
        solution,
    };
    emit(s.output.as_deref(), &report)
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub count: CountType,
    pub envelope: EnvelopeMode,
    pub tail_fraction: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            count: CountType::Covering,
            envelope: EnvelopeMode::Upper,
            tail_fraction: None,
        }
    }
}

fn fit_for(s: &Settings, opts: FitOptions) -> Result<SetFit, CliError> {
    let mut fit = s.set_fit()?;
    fit.count_type = opts.count;
    fit.mode = opts.envelope;
    if let Some(f) = opts.tail_fraction {
        if !(f > 0.0) {
            return Err(CliError::Config(format!("tail fraction must be positive, got {f}")));
        }
        fit = fit.with_fraction(f);
    }
    Ok(fit)
}

/// Finest cutoff on the gaps of `{1/n^p}`: three decades below the finest scale.
fn orbit_set_cutoff(r_min: f64) -> f64 {
    r_min * 1e-3
}

/// A sampled set, the region its truncated part lies in, and the number of
/// cells or points it was built from.
struct Sampled {
    set: CompactSet,
    hull: CompactSet,
    cells: usize,
}

fn sampled_union(rz: &Realization) -> Result<Sampled, CliError> {
    let depth = rz.max_depth();
    Ok(Sampled {
        set: rz.level_union(depth, true)?,
        hull: rz.tail_hulls(depth),
        cells: rz.level(depth).iter().filter(|n| n.is_alive()).count(),
    })
}

#[derive(Serialize)]
struct BoxdimReport<'a> {
    command: &'static str,
    settings: &'a Settings,
    cells: usize,
    estimate: DimensionEstimate,
    rows: Vec<CountRow>,
}

pub fn boxdim(s: &Settings, csv: Option<&Path>, opts: FitOptions) -> Result<(), CliError> {
    let fit = fit_for(s, opts)?;
    let sampled = match s.source()? {
        Source::OrbitSet(p) => {
            let set = orbit_set(p, orbit_set_cutoff(s.r_min))?;
            Sampled {
                hull: orbit_set_hull(&set),
                cells: set.len(),
                set,
            }
        }
        Source::Model(model) => {
            let rz = sample(s, &model, s.seed)?;
            if rz.is_extinct() {
                return Err(CliError::Config(format!(
                    "the construction died out before level {} (try --condition-on-survival)",
                    s.max_depth
                )));
            }
            sampled_union(&rz)?
        }
    };
    let estimate = estimate_set_dimension(&sampled.set, &sampled.hull, sampled.cells, &fit)?;
    let rows = count_table(&sampled.set, &fit.scales)?;
    if let Some(path) = csv {
        let file = std::fs::File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        write_count_csv(std::io::BufWriter::new(file), &rows).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    }
    let report = BoxdimReport {
        command: "boxdim",
        settings: s,
        cells: sampled.cells,
        estimate,
        rows,
    };
    emit(s.output.as_deref(), &report)
}

#[derive(Serialize)]
struct OrbitReport<'a> {
    command: &'static str,
    settings: &'a Settings,
    globals: &'a [f64],
    base: String,
    x: f64,
    estimate: DimensionEstimate,
    sup: Option<GammaSup>,
}

pub fn orbit_dim(
    s: &Settings,
    base: &Address,
    x: f64,
    sup_level: Option<usize>,
    tail_fraction: Option<f64>,
) -> Result<(), CliError> {
    let model = s.model_spec()?;
    let fit = fit_for(
        s,
        FitOptions {
            tail_fraction,
            ..FitOptions::default()
        },
    )?;
    let rz = sample(s, &model, s.seed)?;
    let estimate = estimate_orbit_dimension(&rz, base, x, &fit)?;
    let sup = sup_level.map(|k| estimate_gamma_sup(&rz, k, x, &fit)).transpose()?;
    let report = OrbitReport {
        command: "orbit-dim",
        settings: s,
        globals: rz.globals(),
        base: base.to_string(),
        x,
        estimate,
        sup,
    };
    emit(s.output.as_deref(), &report)
}

pub fn generate(s: &Settings) -> Result<(), CliError> {
    let model = s.model_spec()?;
    let rz = sample(s, &model, s.seed)?;
    emit(s.output.as_deref(), &rz.export())
}

#[derive(Serialize)]
struct Replica {
    seed: u64,
    globals: Vec<f64>,
    extinct: bool,
    cells: usize,
    slope: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct ExperimentReport<'a> {
    command: &'static str,
    settings: &'a Settings,
    alpha: Option<AlphaSolution>,
    alpha_error: Option<String>,
    survived: usize,
    mean_slope: Option<f64>,
    stderr_slope: Option<f64>,
    replicas: Vec<Replica>,
}

fn run_replica(s: &Settings, model: &ModelSpec, fit: &SetFit, seed: u64) -> Replica {
    let mut rep = Replica {
        seed,
        globals: Vec::new(),
        extinct: false,
        cells: 0,
        slope: None,
        error: None,
    };
    let rz = match sample(s, model, seed) {
        Ok(rz) => rz,
        Err(e) => {
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    rep.globals = rz.globals().to_vec();
    rep.extinct = rz.is_extinct();
    if rep.extinct {
        return rep;
    }
    match sampled_union(&rz)
        .and_then(|u| Ok((u.cells, estimate_set_dimension(&u.set, &u.hull, u.cells, fit)?)))
    {
        Ok((cells, est)) => {
            rep.cells = cells;
            rep.slope = Some(est.slope);
        }
        Err(e) => rep.error = Some(e.to_string()),
    }
    rep
}

pub fn experiment(s: &Settings, tol: f64, tail_fraction: Option<f64>) -> Result<(), CliError> {
    let model = s.model_spec()?;
    let fit = fit_for(
        s,
        FitOptions {
            tail_fraction,
            ..FitOptions::default()
        },
    )?;
    let curve = model_curve(&model, s.seed, s.truncation()?);
    let (alpha, alpha_error) = match fracdim::dimension::solve_alpha(&curve, tol) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let replicas: Vec<Replica> = (0..s.replicas as u64)
        .into_par_iter()
        .map(|i| run_replica(s, &model, &fit, replica_seed(s.seed, i)))
        .collect();
    let slopes: Vec<f64> = replicas.iter().filter_map(|r| r.slope).collect();
    let (mean, se) = mean_and_stderr(&slopes);
    let report = ExperimentReport {
        command: "experiment",
        settings: s,
        alpha,
        alpha_error,
        survived: replicas.iter().filter(|r| !r.extinct && r.error.is_none()).count(),
        mean_slope: mean.is_finite().then_some(mean),
        stderr_slope: se.is_finite().then_some(se),
        replicas,
    };
    emit(s.output.as_deref(), &report)
}

pub fn verify(suite: Suite, seed: u64, fault: Fault, only: &[u32], json: bool) -> Result<(), CliError> {
    let plan = Plan { suite, seed, fault };
    let mut results = Vec::new();
    for &(id, _) in &CHECKS {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let r = run_check(id, &plan);
        eprintln!("check {id} took {:.2} s", r.seconds);
        if !json {
            println!(
                "[{}] {:>2} {}: {} (tolerance: {})",
                if r.pass { "PASS" } else { "FAIL" },
                r.id,
                r.name,
                r.measured,
                r.tolerance
            );
        }
        results.push(r);
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&results).expect("serializable"));
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}
