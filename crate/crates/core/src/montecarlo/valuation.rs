//! Pricing of cash-flow schedules, `S_t = Σ E_t[π_T H_T] / π_t` over flows with `T > t`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::simulate_from;
use crate::error::{Error, Result};
use crate::kernel_models::{ModelState, RationalModel};
use crate::numeric::{mix_seed, SampleStats};

/// A payoff paid at a single date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payoff {
    Constant { amount: f64 },
    /// `clamp(constant + m M_T + n N_T, -cap, cap)`; the cap keeps the claim bounded.
    Linear { constant: f64, m: f64, n: f64, cap: f64 },
}

impl Payoff {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Payoff::Constant { amount } if !amount.is_finite() => {
                Err(Error::invalid(format!("payoff amount must be finite, got {amount}")))
            }
            Payoff::Linear { constant, m, n, .. } if !(constant.is_finite() && m.is_finite() && n.is_finite()) => {
                Err(Error::invalid("payoff coefficients must be finite"))
            }
            Payoff::Linear { cap, .. } if !(cap.is_finite() && cap > 0.0) => Err(Error::invalid(format!(
                "factor-dependent payoffs must be bounded: give a finite positive cap, got {cap}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, m: f64, n: Option<f64>) -> f64 {
        match *self {
            Payoff::Constant { amount } => amount,
            Payoff::Linear { constant, m: wm, n: wn, cap } => {
                (constant + wm * m + wn * n.unwrap_or(0.0)).clamp(-cap, cap)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CashFlow {
    pub time: f64,
    pub payoff: Payoff,
}

impl CashFlow {
    pub fn constant(time: f64, amount: f64) -> Self {
        CashFlow { time, payoff: Payoff::Constant { amount } }
    }
}

impl fmt::Display for CashFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.payoff {
            Payoff::Constant { amount } => write!(f, "T={},amount={amount}", self.time),
            Payoff::Linear { constant, m, n, cap } => {
                write!(f, "T={},amount={constant},M={m},N={n},cap={cap}", self.time)
            }
        }
    }
}

/// Parses `T=10,amount=1` or `T=1,M=1,cap=1000` (keys: `T`, `amount`, `M`, `N`, `cap`).
impl FromStr for CashFlow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut time, mut amount, mut m, mut n, mut cap) = (None, 0.0, 0.0, 0.0, None);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("flow field '{part}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("flow field '{part}' has a non-numeric value")))?;
            match k.trim() {
                "T" => time = Some(v),
                "amount" => amount = v,
                "M" => m = v,
                "N" => n = v,
                "cap" => cap = Some(v),
                other => return Err(Error::invalid(format!("unknown flow field '{other}' (T, amount, M, N, cap)"))),
            }
        }
        let time = time.ok_or_else(|| Error::invalid(format!("flow '{s}' has no payment time T")))?;
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::invalid(format!("payment time must be positive, got {time}")));
        }
        let payoff = if m == 0.0 && n == 0.0 {
            Payoff::Constant { amount }
        } else {
            Payoff::Linear { constant: amount, m, n, cap: cap.unwrap_or(f64::INFINITY) }
        };
        payoff.validate()?;
        Ok(CashFlow { time, payoff })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationMethod {
    /// Constant flows in closed form, factor payoffs by conditional simulation.
    Auto,
    ClosedForm,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSettings {
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowValue {
    pub time: f64,
    pub payoff: Payoff,
    pub value: f64,
    pub std_error: f64,
    pub method: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationReport {
    pub state: ModelState,
    pub flows: Vec<FlowValue>,
    pub value: f64,
    pub std_error: f64,
    pub n_paths: Option<usize>,
}

/// Values a schedule at `state`. Simulated flows are priced on one set of
/// paths started from `state`, seeded from `(seed, state)`, so the total's
/// standard error accounts for their correlation.
pub fn value_claim(
    model: &RationalModel,
    state: &ModelState,
    flows: &[CashFlow],
    method: ValuationMethod,
    sim: Option<SimulationSettings>,
) -> Result<ValuationReport> {
    if state.factors() != model.factors() {
        return Err(Error::invalid(format!(
            "state has {} factor(s), model has {}",
            state.factors(),
            model.factors()
        )));
    }
    for f in flows {
        f.payoff.validate()?;
    }
    let simulate = |f: &CashFlow| match method {
        ValuationMethod::Simulation => true,
        ValuationMethod::ClosedForm => false,
        ValuationMethod::Auto => !matches!(f.payoff, Payoff::Constant { .. }),
    };
    if method == ValuationMethod::ClosedForm {
        if let Some(f) = flows.iter().find(|f| !matches!(f.payoff, Payoff::Constant { .. })) {
            return Err(Error::Unsupported(format!(
                "no closed form for the factor-dependent flow '{f}'; use simulation"
            )));
        }
    }

    let mut out: Vec<FlowValue> = flows
        .iter()
        .map(|f| FlowValue { time: f.time, payoff: f.payoff, value: 0.0, std_error: 0.0, method: "expired" })
        .collect();
    let live: Vec<usize> = (0..flows.len()).filter(|&i| flows[i].time > state.t).collect();

    for &i in live.iter().filter(|&&i| !simulate(&flows[i])) {
        let Payoff::Constant { amount } = flows[i].payoff else { unreachable!("closed form only for constants") };
        out[i].value = amount * model.bond_price(state, flows[i].time)?;
        out[i].method = "closed_form";
    }

    let mc: Vec<usize> = live.iter().copied().filter(|&i| simulate(&flows[i])).collect();
    let mut total_se = 0.0;
    let mut n_paths = None;
    if !mc.is_empty() {
        let settings = sim.ok_or_else(|| Error::invalid("simulation settings (paths, seed) are required"))?;
        let mut grid: Vec<f64> = mc.iter().map(|&i| flows[i].time).collect();
        grid.push(state.t);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let drivers = model.drivers();
        let ens = simulate_from(
            &drivers,
            &grid,
            (state.m, state.n.unwrap_or(1.0)),
            settings.n_paths,
            mix_seed(settings.seed, state.fingerprint()),
            model.correlation(),
        )?;
        let pi_t = model.kernel(state.t, state.m, state.n);
        let mut totals = vec![0.0; settings.n_paths];
        for &i in &mc {
            let f = &flows[i];
            let k = ens.index_of(f.time)?;
            let deflated: Vec<f64> = (0..settings.n_paths)
                .map(|p| {
                    let (m, n) = (ens.m(p, k), ens.n(p, k));
                    model.kernel(f.time, m, n) * f.payoff.evaluate(m, n) / pi_t
                })
                .collect();
            for (tot, d) in totals.iter_mut().zip(&deflated) {
                *tot += d;
            }
            let s = SampleStats::from_slice(&deflated);
            out[i].value = s.mean;
            out[i].std_error = s.std_error;
            out[i].method = "simulation";
        }
        total_se = SampleStats::from_slice(&totals).std_error;
        n_paths = Some(settings.n_paths);
    }

    let values: Vec<f64> = out.iter().map(|f| f.value).collect();
    Ok(ValuationReport {
        state: *state,
        value: crate::numeric::pairwise_sum(&values),
        std_error: total_se,
        flows: out,
        n_paths,
    })
}
