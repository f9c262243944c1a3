use std::collections::BTreeMap;

use anyhow::{bail, Result};
use longrate_core::aggregation::{
    aggregate_discount, asymptotic_exponential_rate, default_horizon_schedule, sample_calamity_time,
};
use longrate_core::asymptotics::{
    classify_curve, deterministic_long_rate, estimate_long_rate, CurveClassification, LongRate, LongRateEstimate,
};
use longrate_core::greenbook::{schedule_report, BandCompounding, RateSchedule, DEFAULT_TABLE_MATURITIES};
use longrate_core::kernel_models::RationalModel;
use longrate_core::montecarlo::{kernel_paths, simulate_paths, value_claim, SimulationSettings, ValuationMethod};
use longrate_core::numeric::SampleStats;
use longrate_core::termstructure::{convert_rate, rate_from_log_discount, BondEvaluator, DiscountCurve, RateConvention, Tenor};
use longrate_core::Error;
use serde::Serialize;

use crate::input::{self, Source};
use crate::output::{f, maybe_json, write_file};
use crate::{
    AggregateArgs, ClassifyArgs, Compounding, ConvertArgs, CurveArgs, GreenbookArgs, LongrateArgs, Method, Outcome,
    SimulateArgs, ValueArgs,
};

const DEFAULT_SIM_GRID: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0];

pub fn convert(a: &ConvertArgs) -> Result<Outcome> {
    let tenor = Tenor::new(a.t, a.maturity)?;
    let out = convert_rate(tenor, a.from, a.to, a.value)?;
    let back = convert_rate(tenor, a.to, a.from, out)?;
    println!("{} {}", a.to, f(out));
    println!("round_trip_residual {}", f((back - a.value).abs()));
    Ok(Outcome::Done)
}

pub fn curve(a: &CurveArgs) -> Result<Outcome> {
    let t = a.state.t;
    let src = input::source(&a.model, &a.curve)?;
    let state;
    let ev: &dyn BondEvaluator = match &src {
        Source::Model(m) => {
            state = m.model.evaluator_at(input::state(&m.model, &a.state)?);
            &state
        }
        Source::Curve(c) => c,
    };
    println!("maturity,discount_factor,exponential_rate,libor_rate");
    let mut dfs = Vec::with_capacity(a.maturities.len());
    for &x in &a.maturities {
        if !(x > 0.0) {
            bail!("maturities are times to maturity and must be positive, got {x}");
        }
        let tenor = Tenor::new(t, t + x)?;
        let ln_p = ev.log_bond(t, t + x)?;
        let r = rate_from_log_discount(tenor, RateConvention::Exponential, ln_p)?;
        let l = rate_from_log_discount(tenor, RateConvention::Libor, ln_p)?;
        println!("{},{},{},{}", f(x), f(ln_p.exp()), f(r), f(l));
        dfs.push(ln_p.exp());
    }
    if let Some(path) = &a.out {
        let written = match &src {
            Source::Curve(c) if t == 0.0 => c.clone(),
            _ => DiscountCurve::new(a.maturities.clone(), dfs)?,
        };
        write_file(path, |w| written.write_csv(w, f))?;
    }
    Ok(Outcome::Done)
}

pub fn aggregate(a: &AggregateArgs) -> Result<Outcome> {
    let mix = input::mixture(&a.mixture)?;
    let sample = match a.sample {
        Some(n) => {
            let seed = a.seed.ok_or_else(|| anyhow::anyhow!("--sample needs --seed"))?;
            Some(sample_calamity_time(&mix, n, seed, a.cap)?)
        }
        None => {
            if a.out.is_some() {
                bail!("--out writes sampled calamity times and needs --sample");
            }
            None
        }
    };
    if sample.is_some() {
        println!("t,discount_factor,exponential_rate,survival,std_error,z");
    } else {
        println!("t,discount_factor,exponential_rate");
    }
    for &t in &a.times {
        let p = aggregate_discount(&mix, t)?;
        let r = if t > 0.0 { -p.ln() / t } else { f64::NAN };
        match &sample {
            Some(s) => {
                let st = s.survival(t);
                println!("{},{},{},{},{},{}", f(t), f(p), f(r), f(st.mean), f(st.std_error), f(st.z_score(p)));
            }
            None => println!("{},{},{}", f(t), f(p), f(r)),
        }
    }
    let est = asymptotic_exponential_rate(&mix, &default_horizon_schedule())?;
    println!("asymptotic_rate {} {} target {}", f(est.value), est.status, f(est.target));
    if let Some(s) = &sample {
        println!("censored {} of {} at cap {}", s.censored, s.times.len(), f(s.cap));
        if let Some(path) = &a.out {
            write_file(path, |w| s.write_csv(w, f))?;
        }
    }
    Ok(Outcome::Done)
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let m = input::require_model(&a.model)?;
    let sim = input::simulation(&a.sim, m.run.as_ref(), 2000, &DEFAULT_SIM_GRID)?;
    let ens = simulate_paths(&m.model.drivers(), &sim.grid, sim.n_paths, sim.seed, m.model.correlation())?;
    let kernel = kernel_paths(&m.model, &ens)?;
    println!("t,mean_M,std_error_M,mean_kernel,std_error_kernel,expected_kernel");
    for (i, &t) in ens.grid().iter().enumerate() {
        let sm = SampleStats::from_slice(&ens.m_at(i));
        let sk = kernel.cross_section(i);
        println!(
            "{},{},{},{},{},{}",
            f(t),
            f(sm.mean),
            f(sm.std_error),
            f(sk.mean),
            f(sk.std_error),
            f(m.model.expected_kernel(t))
        );
    }
    if let Some(path) = &a.out {
        write_file(path, |w| ens.write_csv(w, f))?;
    }
    Ok(Outcome::Done)
}

pub fn value(a: &ValueArgs) -> Result<Outcome> {
    let m = input::require_model(&a.model)?;
    let state = input::state(&m.model, &a.state)?;
    let method = match a.method {
        Method::Auto => ValuationMethod::Auto,
        Method::ClosedForm => ValuationMethod::ClosedForm,
        Method::Simulation => ValuationMethod::Simulation,
    };
    let seed = a.seed.or_else(|| m.run.as_ref().and_then(|r| r.seed));
    let sim = seed.map(|seed| SimulationSettings { n_paths: a.paths, seed });
    let report = value_claim(&m.model, &state, &a.flows, method, sim).map_err(|e| match e {
        Error::InvalidInput(msg) if msg.starts_with("simulation settings") => {
            anyhow::anyhow!("simulated flows need a seed: pass --seed or set run.seed in the model file")
        }
        e => e.into(),
    })?;
    for (flow, v) in a.flows.iter().zip(&report.flows) {
        if v.method == "simulation" {
            println!("flow {flow} value {} std_error {} {}", f(v.value), f(v.std_error), v.method);
        } else {
            println!("flow {flow} value {} {}", f(v.value), v.method);
        }
    }
    println!("value {}", f(report.value));
    if let Some(n) = report.n_paths {
        println!("std_error {} paths {n}", f(report.std_error));
    }
    maybe_json(a.out.as_deref(), &report)?;
    Ok(Outcome::Done)
}

/// Closed-form long rate when the convention matches the model's index.
fn model_long_rate(model: &RationalModel, state: &longrate_core::kernel_models::ModelState, conv: RateConvention) -> Option<f64> {
    let index = conv.pareto_index()?;
    if (index - model.lambda()).abs() > 1e-12 {
        return None;
    }
    model.long_rate(state).ok()
}

#[derive(Serialize)]
struct LongrateOutput<'a> {
    #[serde(flatten)]
    estimate: &'a LongRateEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    propagated: Option<LongRate>,
}

pub fn longrate(a: &LongrateArgs) -> Result<Outcome> {
    let schedule = input::horizon_schedule(&a.horizon)?;
    let t = a.state.t;
    let (est, closed_form, propagated) = match input::source(&a.model, &a.curve)? {
        Source::Model(m) => {
            let state = input::state(&m.model, &a.state)?;
            let est = estimate_long_rate(&m.model.evaluator_at(state), t, a.conv, &schedule)?;
            (est, model_long_rate(&m.model, &state, a.conv), None)
        }
        Source::Curve(c) => {
            let est = estimate_long_rate(&c, t, a.conv, &schedule)?;
            (est, None, deterministic_long_rate(&c, t, a.conv).ok())
        }
    };
    println!("{} {} {}", a.conv, f(est.value), est.status);
    match est.limit_value() {
        Some(v) => println!("limit {} {}", est.limit, f(v)),
        None => println!("limit {}", est.limit),
    }
    println!("tail_sup {}", f(est.tail_sup));
    println!("horizon {}", f(est.horizon));
    if let Some(v) = closed_form {
        println!("closed_form {}", f(v));
    }
    match propagated {
        Some(LongRate::Finite(v)) => println!("propagated {}", f(v)),
        Some(LongRate::Divergent) => println!("propagated DIVERGENT"),
        None => {}
    }
    if let Some(n) = &est.note {
        println!("note {n}");
    }
    if let Some(path) = &a.trace {
        write_file(path, |w| est.write_trace_csv(w, f))?;
    }
    maybe_json(a.out.as_deref(), &LongrateOutput { estimate: &est, closed_form, propagated })?;
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    #[serde(flatten)]
    classification: &'a CurveClassification,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    long_rates: BTreeMap<String, LongRate>,
}

pub fn classify(a: &ClassifyArgs) -> Result<Outcome> {
    let Some(curve) = input::curve(&a.curve)? else { bail!("--curve is required") };
    let c = classify_curve(&curve);
    print_classification(&c);
    let mut long_rates = BTreeMap::new();
    for &t in a.at.as_deref().unwrap_or(&[]) {
        let lr = deterministic_long_rate(&curve, t, a.conv)?;
        match lr {
            LongRate::Finite(v) => println!("long_rate t={} {} {}", f(t), a.conv, f(v)),
            LongRate::Divergent => println!("long_rate t={} {} DIVERGENT", f(t), a.conv),
        }
        long_rates.insert(f(t), lr);
    }
    maybe_json(a.out.as_deref(), &ClassifyOutput { classification: &c, long_rates })?;
    Ok(Outcome::Done)
}

fn print_classification(c: &CurveClassification) {
    println!("class {}", display_class(c));
    if let Some((lo, hi)) = c.window {
        println!("window {} {}", f(lo), f(hi));
    }
    if let Some(e) = &c.exponential_fit {
        println!("exponential_fit rate={} residual={} accepted={}", f(e.slope), f(e.residual), e.accepted);
    }
    if let Some(p) = &c.pareto_fit {
        let rate = p.slope * (p.intercept / p.slope).exp();
        println!(
            "pareto_fit lambda={} L={} residual={} accepted={}",
            f(p.slope),
            f(rate),
            f(p.residual),
            p.accepted
        );
    }
    println!("ambiguous {}", c.ambiguous);
    if let Some(n) = &c.note {
        println!("note {n}");
    }
}

fn display_class(c: &CurveClassification) -> String {
    use longrate_core::asymptotics::AsymptoticClass::*;
    match c.class {
        ExponentialType { rate } => format!("exponential rate={}", f(rate)),
        TailParetoType { index, rate } => format!("tail-pareto lambda={} L={}", f(index), f(rate)),
        Undetermined => "undetermined".into(),
    }
}

pub fn greenbook(a: &GreenbookArgs) -> Result<Outcome> {
    let schedule = RateSchedule::read(&a.schedule)?;
    let comp = match a.compounding {
        Compounding::Forward => BandCompounding::Forward,
        Compounding::Spot => BandCompounding::Spot,
    };
    let maturities = a.maturities.clone().unwrap_or_else(|| DEFAULT_TABLE_MATURITIES.to_vec());
    let report = schedule_report(&schedule, comp, &maturities)?;
    println!("maturity,discount_factor,implied_exponential_rate,band_rate");
    for r in &report.rows {
        println!(
            "{},{},{},{}",
            f(r.maturity),
            f(r.discount_factor),
            f(r.implied_exponential_rate),
            f(r.band_rate)
        );
    }
    print_classification(&report.classification);
    println!("time_consistency_residual {}", f(report.time_consistency_residual));
    for (k, v) in &report.components {
        println!("component {k} {}", f(*v));
    }
    if let Some(path) = &a.curve_out {
        let curve = schedule.curve(comp)?;
        write_file(path, |w| curve.write_csv(w, f))?;
    }
    maybe_json(a.out.as_deref(), &report)?;
    Ok(Outcome::Done)
}
