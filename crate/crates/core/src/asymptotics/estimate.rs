use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{geometric_grid, linear_fit};
use crate::report::ConvergenceStatus;
use crate::termstructure::{rate_from_log_discount, BondEvaluator, RateConvention, Tenor};

/// A trace whose spread over the final decade is below this is declared
/// converged; the suprema of all windows sliding through that decade then
/// agree to the same tolerance.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// Rates beyond this magnitude with monotone growth are declared divergent.
pub const DIVERGENCE_CAP: f64 = 1e3;

/// Rates at or below this are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-6;

/// Log-log slope at or below which a positive decreasing tail counts as
/// decaying to zero; its negative is the slope at or above which a positive
/// increasing tail counts as growing without bound.
pub const DECAY_SLOPE: f64 = -0.05;

/// Times to maturity `10, ..., 10^8` years, four per decade.
pub fn default_long_rate_schedule() -> Vec<f64> {
    geometric_grid(10.0, 1e8, 4)
}

/// What the trace says about the limit, beyond the convergence status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitKind {
    /// Converged to a nonzero value.
    Finite,
    /// Converged to zero, or positive and decaying like a power of the horizon.
    Zero,
    /// Divergent, or positive and growing like a power of the horizon.
    Infinite,
    Unknown,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LimitKind::Finite => "FINITE",
            LimitKind::Zero => "ZERO",
            LimitKind::Infinite => "INFINITE",
            LimitKind::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongRateEstimate {
    pub convention: RateConvention,
    pub t: f64,
    /// Rate at the largest maturity reached.
    pub value: f64,
    /// Largest maturity `T` reached.
    pub horizon: f64,
    pub status: ConvergenceStatus,
    /// Supremum over the final decade of times to maturity.
    pub tail_sup: f64,
    pub limit: LimitKind,
    /// `(T, rate)` for each maturity evaluated.
    pub trace: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LongRateEstimate {
    /// CSV with columns `horizon,rate`.
    pub fn write_trace_csv<W: Write>(&self, writer: W, format_value: impl Fn(f64) -> String) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["horizon", "rate"])?;
        for &(h, r) in &self.trace {
            w.write_record([format_value(h), format_value(r)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// The limit as a number: 0 for decay, +inf for divergence, the value when converged.
    pub fn limit_value(&self) -> Option<f64> {
        match self.limit {
            LimitKind::Finite => Some(self.value),
            LimitKind::Zero => Some(0.0),
            LimitKind::Infinite => Some(f64::INFINITY),
            LimitKind::Unknown => None,
        }
    }
}

/// Evaluates the rate of `P_{t,t+x}` in `convention` for each `x` of the
/// schedule and summarises the tail. An evaluator failure stops the trace and
/// yields an unconverged estimate on the data gathered so far.
pub fn estimate_long_rate<E: BondEvaluator + ?Sized>(
    evaluator: &E,
    t: f64,
    convention: RateConvention,
    schedule: &[f64],
) -> Result<LongRateEstimate> {
    convention.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("valuation time must be finite and nonnegative, got {t}")));
    }
    if schedule.len() < 2 || schedule[0] <= 0.0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("horizon schedule must be positive, strictly increasing, with at least two points"));
    }
    let mut trace = Vec::with_capacity(schedule.len());
    let mut xs = Vec::with_capacity(schedule.len());
    let mut note = None;
    for &x in schedule {
        let tenor = Tenor::new(t, t + x)?;
        let rate = evaluator
            .log_bond(t, tenor.end())
            .and_then(|ln_p| rate_from_log_discount(tenor, convention, ln_p));
        match rate {
            Ok(r) if !r.is_nan() => {
                trace.push((tenor.end(), r));
                xs.push(x);
            }
            Ok(_) => {
                note = Some(format!("rate undefined at T = {}", tenor.end()));
                break;
            }
            Err(e) => {
                note = Some(format!("stopped at T = {}: {e}", tenor.end()));
                break;
            }
        }
    }
    let partial = note.is_some();
    let Some(&(horizon, value)) = trace.last() else {
        return Ok(LongRateEstimate {
            convention,
            t,
            value: f64::NAN,
            horizon: t,
            status: ConvergenceStatus::Unconverged,
            tail_sup: f64::NAN,
            limit: LimitKind::Unknown,
            trace,
            note,
        });
    };

    let x_last = *xs.last().expect("nonempty");
    let final_lo = x_last / 10.0 * (1.0 - 1e-9);
    let final_rates: Vec<f64> = xs.iter().zip(&trace).filter(|(x, _)| **x >= final_lo).map(|(_, p)| p.1).collect();
    let sup = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = |v: &[f64]| sup(v) - v.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_sup = sup(&final_rates);

    let nondecreasing = final_rates.windows(2).all(|w| w[1] >= w[0]);
    let status = if value == f64::INFINITY || (tail_sup.abs() > DIVERGENCE_CAP && nondecreasing && value > 0.0) {
        ConvergenceStatus::Divergent
    } else if !partial && xs[0] <= final_lo && final_rates.len() >= 2 && spread(&final_rates) < CONVERGENCE_TOLERANCE {
        ConvergenceStatus::Converged
    } else {
        ConvergenceStatus::Unconverged
    };

    let limit = match status {
        ConvergenceStatus::Divergent => LimitKind::Infinite,
        ConvergenceStatus::Converged if value.abs() <= ZERO_TOLERANCE => LimitKind::Zero,
        ConvergenceStatus::Converged => LimitKind::Finite,
        ConvergenceStatus::Unconverged => {
            let tail: Vec<(f64, f64)> = xs.iter().zip(&trace).filter(|(x, _)| **x >= final_lo).map(|(x, p)| (*x, p.1)).collect();
            let positive_tail = tail.len() >= 2 && tail.iter().all(|&(_, r)| r > 0.0 && r.is_finite());
            let slope = || {
                let lx: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
                let ly: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
                linear_fit(&lx, &ly).0
            };
            if positive_tail && tail.windows(2).all(|w| w[1].1 < w[0].1) && slope() <= DECAY_SLOPE {
                LimitKind::Zero
            } else if positive_tail && tail.windows(2).all(|w| w[1].1 > w[0].1) && slope() >= -DECAY_SLOPE {
                LimitKind::Infinite
            } else {
                LimitKind::Unknown
            }
        }
    };

    Ok(LongRateEstimate { convention, t, value, horizon, status, tail_sup, limit, trace, note })
}
