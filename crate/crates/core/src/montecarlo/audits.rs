use serde::Serialize;

use super::{kernel_paths, PathEnsemble};
use crate::error::{Error, Result};
use crate::kernel_models::{ModelState, RationalModel};
use crate::numeric::SampleStats;
use crate::report::{Audit, Check, Verdict};

/// Width of every Monte Carlo acceptance band, in standard errors.
pub const SE_BAND: f64 = 4.0;

/// Time at which the analytic expected kernel must have become negligible.
pub const VANISHING_PROBE: f64 = 1e6;

/// `E[π_t]` at [`VANISHING_PROBE`] must be below this fraction of `E[π_0]`.
pub const VANISHING_FRACTION: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStat {
    pub t: f64,
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelConditionReport {
    pub probes: Vec<ProbeStat>,
    pub checks: Vec<Check>,
}

impl Audit for KernelConditionReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

/// Checks the three defining properties of a pricing kernel on simulated paths:
/// strict positivity, finite expectation (sample means agree with the analytic
/// `E[π_t]`), and `E[π_t] → 0`.
pub fn kernel_condition_audit(model: &RationalModel, ensemble: &PathEnsemble, probes: &[f64]) -> Result<KernelConditionReport> {
    let indices = probes.iter().map(|&t| ensemble.index_of(t)).collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();

    let kernel = match kernel_paths(model, ensemble) {
        Ok(k) => Some(k),
        Err(Error::InvalidInput(msg)) if msg.starts_with("kernel not strictly positive") => {
            checks.push(Check::new("kernel_positive", Verdict::Fail, msg));
            None
        }
        Err(e) => return Err(e),
    };
    let Some(kernel) = kernel else {
        return Ok(KernelConditionReport { probes: Vec::new(), checks });
    };
    checks.push(Check::new(
        "kernel_positive",
        Verdict::Pass,
        format!("{} paths x {} times, all values > 0", ensemble.n_paths(), ensemble.grid().len()),
    ));

    let mut stats = Vec::new();
    let mut worst_z = 0.0f64;
    let mut all_ok = true;
    for (&t, &i) in probes.iter().zip(&indices) {
        let s = kernel.cross_section(i);
        let expected = model.expected_kernel(t);
        let ok = s.mean.is_finite() && s.agrees_with(expected, SE_BAND);
        all_ok &= ok;
        worst_z = worst_z.max(s.z_score(expected).abs());
        stats.push(ProbeStat { t, mean: s.mean, std_error: s.std_error, expected });
    }
    checks.push(Check::new(
        "kernel_mean_finite",
        Verdict::from_bool(all_ok),
        format!("{} probes, max |z| = {worst_z:.3} against E[pi_t] (band {SE_BAND} SE)", probes.len()),
    ));

    let far: Vec<f64> = [1e3, 1e4, 1e5, VANISHING_PROBE].iter().map(|&t| model.expected_kernel(t)).collect();
    let start = model.expected_kernel(0.0);
    let decreasing = far.windows(2).all(|w| w[1] < w[0]);
    let small = far[far.len() - 1] <= VANISHING_FRACTION * start;
    checks.push(Check::new(
        "expected_kernel_vanishes",
        Verdict::from_bool(decreasing && small),
        format!(
            "E[pi] = {:.3e} at t = 1e6 vs {:.3e} at t = 0; decreasing over 1e3..1e6: {decreasing}",
            far[far.len() - 1],
            start
        ),
    ));
    Ok(KernelConditionReport { probes: stats, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflatedBondReport {
    pub maturity: f64,
    pub target: f64,
    pub rows: Vec<ProbeStat>,
    pub checks: Vec<Check>,
}

impl Audit for DeflatedBondReport {
    fn checks(&self) -> &[Check] {
        &self.checks
    }
}

/// Sample mean of `π_t P_{tT}` at each time must equal `π_0 P_{0T}` within the band.
pub fn deflated_bond_martingale_check(
    model: &RationalModel,
    ensemble: &PathEnsemble,
    times: &[f64],
    maturity: f64,
) -> Result<DeflatedBondReport> {
    let kernel = kernel_paths(model, ensemble)?;
    let initial = model.initial_state();
    let target = model.kernel(0.0, initial.m, initial.n) * model.bond_price(&initial, maturity)?;
    let mut rows = Vec::new();
    let mut ok = true;
    let mut worst_z = 0.0f64;
    for &t in times {
        if t > maturity {
            return Err(Error::invalid(format!("check time {t} is after the bond maturity {maturity}")));
        }
        let i = ensemble.index_of(t)?;
        let deflated = (0..ensemble.n_paths())
            .map(|p| {
                let state = ModelState { t, m: ensemble.m(p, i), n: ensemble.n(p, i) };
                Ok(kernel.value(p, i) * model.bond_price(&state, maturity)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let s = SampleStats::from_slice(&deflated);
        ok &= s.agrees_with(target, SE_BAND);
        // a degenerate cross-section (t = 0) agrees exactly; its z is rounding noise
        if s.std_error > 1e-12 * target.abs() {
            worst_z = worst_z.max(s.z_score(target).abs());
        }
        rows.push(ProbeStat { t, mean: s.mean, std_error: s.std_error, expected: target });
    }
    let checks = vec![Check::new(
        "deflated_bond_martingale",
        Verdict::from_bool(ok),
        format!("{} times, T = {maturity}, max |z| = {worst_z:.3} (band {SE_BAND} SE)", times.len()),
    )];
    Ok(DeflatedBondReport { maturity, target, rows, checks })
}
