//! Resolving models, curves, states and simulation settings from flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use longrate_core::aggregation::RateMixture;
use longrate_core::kernel_models::{ModelConfig, ModelState, RationalModel, RunSpec};
use longrate_core::numeric::geometric_grid;
use longrate_core::termstructure::{DiscountCurve, TailModel};
use longrate_core::zoo;
use serde::Deserialize;

use crate::{CurveArg, HorizonArgs, ModelArg, SimArgs, StateArgs};

pub struct LoadedModel {
    pub model: RationalModel,
    pub run: Option<RunSpec>,
}

/// A path to an existing file wins over a bundled name.
pub fn model(arg: &ModelArg) -> Result<Option<LoadedModel>> {
    let Some(spec) = arg.model.as_deref() else { return Ok(None) };
    let config = if Path::new(spec).is_file() {
        ModelConfig::read(spec).with_context(|| format!("reading model {spec}"))?
    } else if zoo::model_json(spec).is_some() {
        zoo::model_config(spec)?
    } else {
        let known: Vec<&str> = zoo::model_names().collect();
        bail!("model '{spec}' is neither a file nor a bundled model ({})", known.join(", "));
    };
    let model = config.build().with_context(|| format!("building model {spec}"))?;
    Ok(Some(LoadedModel { model, run: config.run }))
}

pub fn require_model(arg: &ModelArg) -> Result<LoadedModel> {
    model(arg)?.ok_or_else(|| anyhow::anyhow!("--model is required"))
}

pub fn parse_tail(spec: &str) -> Result<TailModel> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number '{s}' in tail '{spec}'"));
    match parts.as_slice() {
        ["exp", r] => Ok(TailModel::Exponential { rate: num(r)? }),
        ["pareto", l, r] => Ok(TailModel::TailPareto { index: num(l)?, rate: num(r)? }),
        _ => bail!("bad tail '{spec}' (expected exp:<rate> or pareto:<index>:<rate>)"),
    }
}

pub fn curve(arg: &CurveArg) -> Result<Option<DiscountCurve>> {
    let Some(spec) = arg.curve.as_deref() else {
        if arg.tail.is_some() {
            bail!("--tail needs --curve");
        }
        return Ok(None);
    };
    let mut curve = if Path::new(spec).is_file() {
        DiscountCurve::read_csv(spec).with_context(|| format!("reading curve {spec}"))?
    } else {
        zoo::curve(spec)?
    };
    if let Some(t) = arg.tail.as_deref() {
        curve = curve.with_tail(parse_tail(t)?)?;
    }
    Ok(Some(curve))
}

/// Exactly one of a model or a curve.
pub enum Source {
    Model(Box<LoadedModel>),
    Curve(DiscountCurve),
}

pub fn source(m: &ModelArg, c: &CurveArg) -> Result<Source> {
    match (model(m)?, curve(c)?) {
        (Some(m), None) => Ok(Source::Model(Box::new(m))),
        (None, Some(c)) => Ok(Source::Curve(c)),
        (Some(_), Some(_)) => bail!("give either --model or --curve, not both"),
        (None, None) => bail!("one of --model or --curve is required"),
    }
}

pub fn state(model: &RationalModel, s: &StateArgs) -> Result<ModelState> {
    Ok(model.state(s.t, s.m, s.n)?)
}

/// Explicit flags win, then the model's bundled run settings, then the defaults.
pub struct Simulation {
    pub seed: u64,
    pub n_paths: usize,
    pub grid: Vec<f64>,
}

pub fn simulation(args: &SimArgs, run: Option<&RunSpec>, default_paths: usize, default_grid: &[f64]) -> Result<Simulation> {
    let seed = args
        .seed
        .or_else(|| run.and_then(|r| r.seed))
        .ok_or_else(|| anyhow::anyhow!("a seed is required: pass --seed or set run.seed in the model file"))?;
    let n_paths = args.paths.or_else(|| run.and_then(|r| r.n_paths)).unwrap_or(default_paths);
    let grid = args
        .grid
        .clone()
        .or_else(|| run.and_then(|r| r.grid.clone()))
        .unwrap_or_else(|| default_grid.to_vec());
    Ok(Simulation { seed, n_paths, grid })
}

/// Sorted, deduplicated union of time lists, starting at 0.
pub fn merged_grid(lists: &[&[f64]]) -> Vec<f64> {
    let mut g: Vec<f64> = std::iter::once(0.0).chain(lists.iter().flat_map(|l| l.iter().copied())).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn horizon_schedule(h: &HorizonArgs) -> Result<Vec<f64>> {
    if !(h.start > 0.0 && h.horizon > h.start && h.horizon.is_finite()) {
        bail!("need 0 < --start < --horizon, got {} and {}", h.start, h.horizon);
    }
    if h.per_decade == 0 {
        bail!("--per-decade must be at least 1");
    }
    Ok(geometric_grid(h.start, h.horizon, h.per_decade))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MixtureFile {
    Wrapped { mixture: RateMixture },
    Bare(RateMixture),
}

/// Inline JSON when the argument starts with `{`, otherwise a file holding
/// either the mixture itself or an object with a `mixture` key.
pub fn mixture(spec: &str) -> Result<RateMixture> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec).with_context(|| format!("reading mixture {spec}"))?
    };
    let parsed: MixtureFile = serde_json::from_str(&text).context(
        "mixture must be {\"kind\":\"discrete\",\"weights\":[..],\"rates\":[..]}, \
         {\"kind\":\"exponential\",\"mean_rate\":L} or {\"kind\":\"gamma\",\"shape\":k,\"mean_rate\":L}",
    )?;
    let mix = match parsed {
        MixtureFile::Wrapped { mixture } | MixtureFile::Bare(mixture) => mixture,
    };
    mix.validate()?;
    Ok(mix)
}
