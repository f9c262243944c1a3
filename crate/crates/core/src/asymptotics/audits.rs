use rayon::prelude::*;
use serde::Serialize;

use super::estimate::{estimate_long_rate, LimitKind, LongRateEstimate, ZERO_TOLERANCE};
use crate::error::{Error, Result};
use crate::kernel_models::{ModelState, RationalModel};
use crate::montecarlo::{kernel_paths, PathEnsemble, SE_BAND};
use crate::numeric::SampleStats;
use crate::report::{Audit, Check, Verdict};
use crate::termstructure::{BondEvaluator, DiscountCurve, RateConvention};

/// Discount factors still at or above this at the largest horizon do not tend to zero.
pub const ADMISSIBLE_DISCOUNT: f64 = 1e-2;

/// Slack allowed on monotonicity of long-rate estimates.
pub const DIR_TOLERANCE: f64 = 1e-6;

/// The certificate needs an ensemble grid reaching at least this far.
pub const MIN_CERTIFICATE_HORIZON: f64 = 1e3;

/// Bound on the spread (max / min) of `t^λ π_t` means and of `T^λ P_{tT}`.
pub const BOUNDED_RATIO: f64 = 2.0;

/// Maturities at which `T^λ P_{tT}` is probed.
pub const BOND_PROBES: [f64; 3] = [1e6, 1e7, 1e8];

/// Quantile bins of `θ_s` conditioned on in the supermartingale check.
pub const THETA_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratificationReport {
    pub t: f64,
    /// The exponential estimate first, then tail-Pareto estimates by decreasing index.
    pub estimates: Vec<LongRateEstimate>,
    pub checks: Vec<Check>,
}

impl Audit for StratificationReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

fn label(e: &LongRateEstimate) -> String {
    match e.convention {
        RateConvention::Exponential => "R".to_string(),
        c => format!("L^({})", c.pareto_index().unwrap_or(f64::NAN)),
    }
}

fn describe(e: &LongRateEstimate) -> String {
    match e.limit {
        LimitKind::Finite => format!("{} = {:.6e}", label(e), e.value),
        LimitKind::Zero => format!("{} -> 0", label(e)),
        LimitKind::Infinite => format!("{} = inf", label(e)),
        LimitKind::Unknown => format!("{} unknown ({})", label(e), e.status),
    }
}

fn finite(e: &LongRateEstimate) -> bool {
    matches!(e.limit, LimitKind::Finite | LimitKind::Zero)
}

/// Positive or infinite.
fn positive(e: &LongRateEstimate) -> bool {
    e.limit == LimitKind::Infinite || (e.limit == LimitKind::Finite && e.value > ZERO_TOLERANCE)
}

/// Verdict over pairs: any violation fails; otherwise an unknown member of
/// any pair makes the check inconclusive.
fn pair_check(
    name: &str,
    pairs: &[(&LongRateEstimate, &LongRateEstimate)],
    violated: impl Fn(&LongRateEstimate, &LongRateEstimate) -> Option<String>,
) -> Check {
    let mut unknown = false;
    for &(x, y) in pairs {
        if x.limit == LimitKind::Unknown || y.limit == LimitKind::Unknown {
            unknown = true;
            continue;
        }
        if let Some(why) = violated(x, y) {
            return Check::new(name, Verdict::Fail, why);
        }
    }
    let mut seen: Vec<String> = Vec::new();
    for &(x, y) in pairs {
        for d in [describe(x), describe(y)] {
            if !seen.contains(&d) {
                seen.push(d);
            }
        }
    }
    let verdict = if unknown { Verdict::Inconclusive } else { Verdict::Pass };
    Check::new(name, verdict, seen.join(", "))
}

/// Estimates the long exponential rate and the tail-Pareto long rates for
/// each index, and checks that the pattern is one that can occur:
/// `R ≥ 0`; a finite tail-Pareto long rate forces `R = 0` and a positive `R`
/// forces every tail-Pareto long rate to infinity; for `α > β`, `L^(α) > 0`
/// forces `L^(β) = ∞`; and `R ≤ L^(α) ≤ L^(β)`.
pub fn stratification_audit<E: BondEvaluator + ?Sized>(
    evaluator: &E,
    t: f64,
    indices: &[f64],
    schedule: &[f64],
) -> Result<StratificationReport> {
    if indices.is_empty() || indices.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::invalid("stratification needs at least one finite positive tail-Pareto index"));
    }
    let mut indices = indices.to_vec();
    indices.sort_by(|a, b| b.total_cmp(a));
    indices.dedup();
    let far = t + schedule.last().copied().unwrap_or(0.0);
    if let Ok(ln_p) = evaluator.log_bond(t, far) {
        if ln_p >= ADMISSIBLE_DISCOUNT.ln() {
            return Err(Error::invalid(format!(
                "not an admissible discount system: P({t}, {far}) = {} does not tend to zero",
                ln_p.exp()
            )));
        }
    }

    let r = estimate_long_rate(evaluator, t, RateConvention::Exponential, schedule)?;
    let ls = indices
        .iter()
        .map(|&l| estimate_long_rate(evaluator, t, RateConvention::tail_pareto(l)?, schedule))
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    checks.push(match r.limit {
        LimitKind::Unknown => Check::new("long_exponential_nonnegative", Verdict::Inconclusive, describe(&r)),
        LimitKind::Finite if r.value < -ZERO_TOLERANCE => {
            Check::new("long_exponential_nonnegative", Verdict::Fail, format!("{} is negative", describe(&r)))
        }
        _ => Check::new("long_exponential_nonnegative", Verdict::Pass, describe(&r)),
    });

    let exp_pairs: Vec<_> = ls.iter().map(|l| (&r, l)).collect();
    checks.push(pair_check("exponential_vs_pareto_stratification", &exp_pairs, |r, l| {
        (positive(r) && finite(l)).then(|| {
            format!("{} with {} finite: a positive exponential long rate forces every tail-Pareto long rate to infinity", describe(r), describe(l))
        })
    }));

    let idx_pairs: Vec<_> =
        (0..ls.len()).flat_map(|i| (i + 1..ls.len()).map(move |j| (i, j))).map(|(i, j)| (&ls[i], &ls[j])).collect();
    checks.push(if idx_pairs.is_empty() {
        Check::new("pareto_index_stratification", Verdict::Pass, "single index, nothing to compare")
    } else {
        pair_check("pareto_index_stratification", &idx_pairs, |hi, lo| {
            (positive(hi) && finite(lo)).then(|| {
                format!("{} is positive but {} is finite: a positive long rate at a larger index forces infinity at every smaller index", describe(hi), describe(lo))
            })
        })
    });

    let mut chain: Vec<&LongRateEstimate> = vec![&r];
    chain.extend(ls.iter());
    let order_pairs: Vec<_> = chain.windows(2).map(|w| (w[0], w[1])).collect();
    checks.push(pair_check("long_rate_ordering", &order_pairs, |x, y| {
        let (vx, vy) = (x.limit_value().expect("known"), y.limit_value().expect("known"));
        (vx > vy + ZERO_TOLERANCE && !(vx.is_infinite() && vy.is_infinite()))
            .then(|| format!("{} exceeds {}", describe(x), describe(y)))
    }));

    let mut estimates = vec![r];
    estimates.extend(ls);
    Ok(StratificationReport { t, estimates, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirTimeRow {
    pub t: f64,
    pub min_long_exponential: f64,
    pub max_long_exponential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirReport {
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub horizon: f64,
    pub rows: Vec<DirTimeRow>,
    /// Most negative step `R_{t_{i+1}∞} - R_{t_i∞}` over all paths.
    pub min_step: f64,
    pub failed_estimates: usize,
    pub checks: Vec<Check>,
}

impl Audit for DirReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

/// Long exponential rate at the largest horizon, or `None` when the
/// estimate stopped early or says nothing about the limit.
fn long_exponential<E: BondEvaluator + ?Sized>(ev: &E, t: f64, schedule: &[f64]) -> Result<Option<f64>> {
    let e = estimate_long_rate(ev, t, RateConvention::Exponential, schedule)?;
    Ok((e.note.is_none() && e.limit != LimitKind::Unknown && !e.value.is_nan()).then_some(e.value))
}

fn min_step(series: &[Vec<f64>]) -> f64 {
    series
        .iter()
        .flat_map(|s| s.windows(2).map(|w| if w[0] == w[1] { 0.0 } else { w[1] - w[0] }))
        .fold(f64::INFINITY, f64::min)
}

fn monotone_check(name: &str, series: &[Vec<f64>], failed: usize, what: &str) -> Check {
    let step = min_step(series);
    let step_txt = if step.is_finite() { format!("{step:.3e}") } else { "none".to_string() };
    if step < -DIR_TOLERANCE || step.is_nan() {
        Check::new(name, Verdict::Fail, format!("{what} fell by {:.3e} between grid times", -step))
    } else if failed > 0 {
        Check::new(name, Verdict::Inconclusive, format!("{failed} estimate(s) failed; smallest step {step_txt}"))
    } else {
        Check::new(name, Verdict::Pass, format!("smallest step {step_txt} (tolerance {DIR_TOLERANCE:e})"))
    }
}

fn zero_coupon_series(series: &[Vec<f64>]) -> Vec<Vec<f64>> {
    series.iter().map(|s| s.iter().map(|r| r.exp_m1()).collect()).collect()
}

fn dir_rows(times: &[f64], series: &[Vec<f64>]) -> Vec<DirTimeRow> {
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let col = series.iter().map(|s| s[i]);
            DirTimeRow {
                t,
                min_long_exponential: col.clone().fold(f64::INFINITY, f64::min),
                max_long_exponential: col.fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// Long exponential rates `R_{t∞}` along every simulated path must be
/// nondecreasing in `t`, as must the long zero-coupon rate `e^R - 1`. For a
/// rational model every coefficient decays like a power, so every estimate
/// must also be essentially zero.
pub fn dir_monotonicity_audit(
    model: &RationalModel,
    ensemble: &PathEnsemble,
    times: &[f64],
    schedule: &[f64],
) -> Result<DirReport> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("audit times must be nonempty and strictly increasing"));
    }
    let idx = times.iter().map(|&t| ensemble.index_of(t)).collect::<Result<Vec<_>>>()?;
    let per_path = (0..ensemble.n_paths())
        .into_par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(times.len());
            for (&t, &i) in times.iter().zip(&idx) {
                let state = ModelState { t, m: ensemble.m(p, i), n: ensemble.n(p, i) };
                out.push(long_exponential(&model.evaluator_at(state), t, schedule)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<Option<f64>>>>>()?;
    let failed = per_path.iter().flatten().filter(|v| v.is_none()).count();
    let series: Vec<Vec<f64>> =
        per_path.into_iter().map(|s| s.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).collect();
    let clean: Vec<Vec<f64>> = series.iter().filter(|s| s.iter().all(|v| !v.is_nan())).cloned().collect();

    let mut checks = vec![monotone_check("long_exponential_nondecreasing", &clean, failed, "R_{t,inf}")];
    let max = clean.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::new(
        "long_exponential_vanishes",
        if max > ZERO_TOLERANCE {
            Verdict::Fail
        } else if failed > 0 || clean.is_empty() {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        },
        format!(
            "max R_{{t,inf}} = {max:.3e} over {} paths x {} times (bound {ZERO_TOLERANCE:e}, tail index {})",
            clean.len(),
            times.len(),
            model.lambda()
        ),
    ));
    checks.push(monotone_check("long_zero_coupon_nondecreasing", &zero_coupon_series(&clean), failed, "Z_{t,inf}"));
    Ok(DirReport {
        times: times.to_vec(),
        n_paths: ensemble.n_paths(),
        horizon: schedule.last().copied().unwrap_or(f64::NAN),
        rows: dir_rows(times, &series),
        min_step: min_step(&clean),
        failed_estimates: failed,
        checks,
    })
}

/// Deterministic version: the long exponential rate of a fixed curve must be
/// nondecreasing, and since `P_{tT} = P_{0T}/P_{0t}` it is in fact constant.
pub fn dir_curve_audit(curve: &DiscountCurve, times: &[f64], schedule: &[f64]) -> Result<DirReport> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("audit times must be nonempty and strictly increasing"));
    }
    let values = times.iter().map(|&t| long_exponential(curve, t, schedule)).collect::<Result<Vec<_>>>()?;
    let failed = values.iter().filter(|v| v.is_none()).count();
    let series = vec![values.iter().map(|v| v.unwrap_or(f64::NAN)).collect::<Vec<f64>>()];
    let clean: Vec<Vec<f64>> = series.iter().filter(|s| s.iter().all(|v| !v.is_nan())).cloned().collect();

    let mut checks = vec![monotone_check("long_exponential_nondecreasing", &clean, failed, "R_{t,inf}")];
    let known: Vec<f64> = values.iter().flatten().copied().collect();
    let spread = known.iter().copied().fold(f64::NEG_INFINITY, f64::max) - known.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "long_exponential_constant",
        if known.is_empty() || failed > 0 {
            Verdict::Inconclusive
        } else {
            Verdict::from_bool(spread <= DIR_TOLERANCE || known.iter().all(|v| v.is_infinite()))
        },
        format!("R_{{t,inf}} spread {spread:.3e} over {} times", times.len()),
    ));
    checks.push(monotone_check("long_zero_coupon_nondecreasing", &zero_coupon_series(&clean), failed, "Z_{t,inf}"));
    Ok(DirReport {
        times: times.to_vec(),
        n_paths: 1,
        horizon: schedule.last().copied().unwrap_or(f64::NAN),
        rows: dir_rows(times, &series),
        min_step: min_step(&clean),
        failed_estimates: failed,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailMeanRow {
    pub t: f64,
    /// Sample mean of `t^λ π_t`.
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoCertificate {
    pub index: f64,
    pub model_index: f64,
    pub tail_window: Option<(f64, f64)>,
    pub tail_means: Vec<TailMeanRow>,
    pub checks: Vec<Check>,
}

impl Audit for ParetoCertificate {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

/// Checks that the kernel is asymptotically tail-Pareto with the given index:
/// (a) `t^λ π_t` stays strictly positive over the tail window on every path,
/// (b) its sample mean stays bounded there, (c) `T^λ P_{tT}` is bounded away
/// from 0 and ∞ at probe states, and (d) `θ_t` is a supermartingale, tested
/// conditionally on quantile bins of `θ_s` for consecutive grid times.
pub fn pareto_kernel_certificate(model: &RationalModel, ensemble: &PathEnsemble, index: f64) -> Result<ParetoCertificate> {
    if !(index.is_finite() && index > 0.0) {
        return Err(Error::invalid(format!("tail index must be finite and positive, got {index}")));
    }
    let grid = ensemble.grid();
    let end = *grid.last().expect("grid starts at 0");
    let model_index = model.lambda();
    if end < MIN_CERTIFICATE_HORIZON {
        let detail = format!("ensemble grid ends at {end}; the tail window needs at least {MIN_CERTIFICATE_HORIZON}");
        let checks = ["tail_kernel_positive", "tail_kernel_mean_bounded", "tail_bond_bounded", "theta_supermartingale"]
            .into_iter()
            .map(|n| Check::new(n, Verdict::Inconclusive, detail.clone()))
            .collect();
        return Ok(ParetoCertificate { index, model_index, tail_window: None, tail_means: Vec::new(), checks });
    }
    let kernel = kernel_paths(model, ensemble)?;
    let window: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] >= end / 10.0 * (1.0 - 1e-12)).collect();
    let mut checks = Vec::new();

    let mut inf = f64::INFINITY;
    let mut tail_means = Vec::new();
    for &i in &window {
        let t = grid[i];
        let scaled: Vec<f64> = kernel.at(i).into_iter().map(|v| (index * t.ln() + v.ln()).exp()).collect();
        inf = scaled.iter().copied().fold(inf, f64::min);
        let s = SampleStats::from_slice(&scaled);
        tail_means.push(TailMeanRow { t, mean: s.mean, std_error: s.std_error });
    }
    checks.push(Check::new(
        "tail_kernel_positive",
        Verdict::from_bool(inf > 0.0 && inf.is_finite()),
        format!("inf of t^{index} pi_t over [{}, {end}] = {inf:.6e}", end / 10.0),
    ));

    let first = tail_means.first().expect("window contains the last grid point").mean;
    let ratios: Vec<f64> = tail_means.iter().map(|r| r.mean / first).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    checks.push(Check::new(
        "tail_kernel_mean_bounded",
        Verdict::from_bool(lo >= 1.0 / BOUNDED_RATIO && hi <= BOUNDED_RATIO && first.is_finite() && first > 0.0),
        format!(
            "mean t^{index} pi_t ranges over [{lo:.4}, {hi:.4}] x its value {first:.6e} at t = {} (bound {BOUNDED_RATIO})",
            end / 10.0
        ),
    ));

    // probe states: initial state and a few paths at the first positive grid time
    let mut states = vec![model.initial_state()];
    if grid.len() > 1 {
        for p in 0..ensemble.n_paths().min(5) {
            states.push(ModelState { t: grid[1], m: ensemble.m(p, 1), n: ensemble.n(p, 1) });
        }
    }
    let mut worst = 1.0f64;
    let mut ok = true;
    for st in &states {
        let vals = BOND_PROBES
            .iter()
            .map(|&x| {
                let big_t = st.t + x;
                Ok((index * big_t.ln() + model.log_bond_price(st, big_t)?).exp())
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mn, mx) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        ok &= mn > 0.0 && mx.is_finite();
        worst = worst.max(mx / mn);
    }
    ok &= worst <= BOUNDED_RATIO;
    checks.push(Check::new(
        "tail_bond_bounded",
        Verdict::from_bool(ok),
        format!("max/min of T^{index} P_tT over T - t in 1e6..1e8 = {worst:.4} at {} states", states.len()),
    ));

    checks.push(theta_check(model, ensemble, index));
    Ok(ParetoCertificate { index, model_index, tail_window: Some((end / 10.0, end)), tail_means, checks })
}

fn theta_check(model: &RationalModel, ensemble: &PathEnsemble, index: f64) -> Check {
    const NAME: &str = "theta_supermartingale";
    let model_index = model.lambda();
    if (index - model_index).abs() > 1e-12 * model_index {
        return Check::new(
            NAME,
            Verdict::Inconclusive,
            format!("theta is the limit at the model's own index {model_index}, not {index}"),
        );
    }
    let n_paths = ensemble.n_paths();
    let theta_at =
        |i: usize| -> Vec<f64> { (0..n_paths).map(|p| model.theta(ensemble.m(p, i), ensemble.n(p, i))).collect() };
    let grid = ensemble.grid();
    let theta0 = theta_at(0)[0];
    let slack = 1e-12 * theta0.abs().max(1.0);
    let mut worst_z = f64::NEG_INFINITY;
    let mut worst_mean_z = 0.0f64;
    let mut ok = true;
    let mut prev = theta_at(0);
    for i in 1..grid.len() {
        let cur = theta_at(i);
        let all = SampleStats::from_slice(&cur);
        if (all.mean - theta0).abs() > SE_BAND * all.std_error + slack {
            ok = false;
        }
        worst_mean_z = worst_mean_z.max(all.z_score(theta0).abs());
        if n_paths >= 2 * THETA_BINS {
            let mut order: Vec<usize> = (0..n_paths).collect();
            order.sort_by(|&a, &b| prev[a].total_cmp(&prev[b]).then(a.cmp(&b)));
            for bin in 0..THETA_BINS {
                let members = &order[bin * n_paths / THETA_BINS..(bin + 1) * n_paths / THETA_BINS];
                let diffs: Vec<f64> = members.iter().map(|&p| cur[p] - prev[p]).collect();
                let s = SampleStats::from_slice(&diffs);
                if s.mean > SE_BAND * s.std_error + slack {
                    ok = false;
                }
                if s.std_error > 0.0 {
                    worst_z = worst_z.max(s.mean / s.std_error);
                }
            }
        }
        prev = cur;
    }
    let worst_txt = if worst_z.is_finite() { format!("{worst_z:.3}") } else { "n/a (theta deterministic)".into() };
    Check::new(
        NAME,
        Verdict::from_bool(ok),
        format!(
            "max binned drift z = {worst_txt}, max |z| of E[theta_t] vs theta_0 = {worst_mean_z:.3} over {} steps (band {SE_BAND} SE)",
            grid.len() - 1
        ),
    )
}
