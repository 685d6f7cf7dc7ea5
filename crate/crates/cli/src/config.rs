//! Experiment configuration: a JSON file whose fields can be overridden by
//! command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use fracdim::construction::{ModelSpec, Semantics, Truncation};
use fracdim::dimension::SetFit;
use fracdim::models;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "FRACDIM_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub r_max: Option<f64>,
    pub r_min: Option<f64>,
    /// Decade grid with this many points per decade; dyadic `2^-k` when absent.
    pub points_per_decade: Option<u32>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub max_depth: Option<usize>,
    pub eps_trunc: Option<f64>,
    /// Alternative to `eps_trunc` for thresholds below `f64` range.
    pub log10_eps_trunc: Option<f64>,
    #[serde(default)]
    pub scales: ScaleConfig,
    pub replicas: Option<usize>,
    pub semantics: Option<Semantics>,
    pub condition_on_survival: Option<bool>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v = v.parse::<f64>().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.to_string(), v))
}

/// Flags shared by every command that builds a model.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cantor, homogeneous, example1, example2 (and orbit_set for boxdim).
    #[arg(long)]
    pub model: Option<String>,
    /// Model parameter as key=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub arity: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub keep_prob: Option<f64>,
    /// Defaults to $FRACDIM_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Truncation threshold on cell diameters.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Truncation threshold given as log10.
    #[arg(long, allow_hyphen_values = true)]
    pub log10_eps: Option<f64>,
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub points_per_decade: Option<u32>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, value_parser = parse_semantics)]
    pub semantics: Option<Semantics>,
    /// Resample until the construction survives to the full depth.
    #[arg(long)]
    pub condition_on_survival: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_semantics(s: &str) -> Result<Semantics, String> {
    match s {
        "recursive" => Ok(Semantics::Recursive),
        "fractal" => Ok(Semantics::Fractal),
        other => Err(format!("expected recursive or fractal, got {other:?}")),
    }
}

/// What a command builds its input from.
pub enum Source {
    Model(ModelSpec),
    /// `{1/n^p}` with the given exponent.
    OrbitSet(f64),
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub max_depth: usize,
    pub log10_eps_trunc: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub points_per_decade: Option<u32>,
    pub replicas: usize,
    pub semantics: Semantics,
    pub condition_on_survival: bool,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 1e-1;
pub const DEFAULT_LOG10_EPS: f64 = -12.0;

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let model = args
            .model
            .clone()
            .or(file.model)
            .ok_or_else(|| CliError::Config("no model given (use --model or a config file)".into()))?;
        let mut params = file.params;
        let named = [
            ("ratio", args.ratio),
            ("arity", args.arity.map(f64::from)),
            ("p", args.p),
            ("lo", args.lo),
            ("hi", args.hi),
            ("keep_prob", args.keep_prob),
        ];
        for (k, v) in named {
            if let Some(v) = v {
                params.insert(k.to_string(), v);
            }
        }
        for (k, v) in &args.params {
            params.insert(k.clone(), *v);
        }
        let seed = match args.seed.or(file.seed) {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|e| CliError::Config(format!("{SEED_ENV}={v:?}: {e}")))?,
                Err(_) => 0,
            },
        };
        let log10_eps = match (args.log10_eps, args.eps, file.log10_eps_trunc, file.eps_trunc) {
            (Some(l), ..) => l,
            (None, Some(e), ..) => checked_log10(e)?,
            (None, None, Some(l), _) => l,
            (None, None, None, Some(e)) => checked_log10(e)?,
            _ => DEFAULT_LOG10_EPS,
        };
        let finite = model == "cantor" || model == "homogeneous";
        let settings = Settings {
            max_depth: args.depth.or(file.max_depth).unwrap_or(if finite { 12 } else { 2 }),
            log10_eps_trunc: log10_eps,
            r_min: args.rmin.or(file.scales.r_min).unwrap_or(DEFAULT_R_MIN),
            r_max: args.rmax.or(file.scales.r_max).unwrap_or(DEFAULT_R_MAX),
            points_per_decade: args.points_per_decade.or(file.scales.points_per_decade),
            replicas: args.replicas.or(file.replicas).unwrap_or(20),
            semantics: args.semantics.or(file.semantics).unwrap_or_default(),
            condition_on_survival: args.condition_on_survival || file.condition_on_survival.unwrap_or(false),
            output: args.output.clone().or(file.output),
            model,
            params,
            seed,
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(CliError::Config(format!(
                "need 0 < r_min < r_max, got r_min = {}, r_max = {}",
                self.r_min, self.r_max
            )));
        }
        if self.points_per_decade.is_some_and(|n| n < 2) {
            return Err(CliError::Config("points_per_decade must be at least 2".into()));
        }
        if self.replicas == 0 {
            return Err(CliError::Config("replicas must be at least 1".into()));
        }
        Ok(())
    }

    pub fn truncation(&self) -> Result<Truncation, CliError> {
        Ok(Truncation::from_log10(self.log10_eps_trunc)?)
    }

    pub fn source(&self) -> Result<Source, CliError> {
        if self.model == "orbit_set" {
            if let Some(k) = self.params.keys().find(|k| k.as_str() != "p") {
                return Err(CliError::Config(format!("model orbit_set has no parameter {k:?}")));
            }
            return Ok(Source::OrbitSet(self.params.get("p").copied().unwrap_or(1.0)));
        }
        Ok(Source::Model(models::build(&self.model, &self.params)?))
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        match self.source()? {
            Source::Model(m) => Ok(m),
            Source::OrbitSet(_) => Err(CliError::Config(
                "orbit_set is a fixed point set, not a construction; only boxdim accepts it".into(),
            )),
        }
    }

    pub fn set_fit(&self) -> Result<SetFit, CliError> {
        let fit = SetFit::over(self.r_min, self.r_max)?;
        Ok(match self.points_per_decade {
            Some(n) => fit.with_per_decade(n)?,
            None => fit,
        })
    }
}

fn checked_log10(eps: f64) -> Result<f64, CliError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(eps.log10())
    } else {
        Err(CliError::Config(format!("eps must be in (0, 1), got {eps}")))
    }
}
