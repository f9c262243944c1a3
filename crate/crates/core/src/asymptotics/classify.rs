use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::{geometric_grid, linear_fit};
use crate::termstructure::{DiscountCurve, RateConvention, TailModel};

/// A fit is accepted when the largest deviation of `-ln P` from it is below this.
pub const FIT_RESIDUAL: f64 = 1e-3;

/// Shortest usable tail window end, in years.
pub const MIN_CLASSIFY_HORIZON: f64 = 1e3;

/// Window end used when the curve carries a tail model.
pub const MODEL_CLASSIFY_HORIZON: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum AsymptoticClass {
    /// `P_{0T} ≈ C e^{-rT}`.
    ExponentialType { rate: f64 },
    /// `P_{0T} ≈ (L T / λ)^(-λ)`.
    TailParetoType { index: f64, rate: f64 },
    Undetermined,
}

impl fmt::Display for AsymptoticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AsymptoticClass::ExponentialType { rate } => write!(f, "exponential(r={rate})"),
            AsymptoticClass::TailParetoType { index, rate } => write!(f, "tail-pareto(lambda={index}, L={rate})"),
            AsymptoticClass::Undetermined => f.write_str("undetermined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of `-ln P` from the fitted line.
    pub residual: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveClassification {
    pub class: AsymptoticClass,
    pub window: Option<(f64, f64)>,
    /// `-ln P ≈ r T + c`.
    pub exponential_fit: Option<FitDiagnostics>,
    /// `-ln P ≈ λ ln T + c`.
    pub pareto_fit: Option<FitDiagnostics>,
    /// Both fits were accepted; the class is the one with the smaller residual.
    pub ambiguous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Fits the exponential and tail-Pareto shapes to `-ln P_{0T}` over the
/// window `[W/10, W]`. `W` is [`MODEL_CLASSIFY_HORIZON`] (or ten times the
/// last grid point, if larger) when the curve has a tail model, and the last
/// grid point otherwise.
pub fn classify_curve(curve: &DiscountCurve) -> CurveClassification {
    let end = if curve.tail().is_some() {
        (10.0 * curve.last_maturity()).max(MODEL_CLASSIFY_HORIZON)
    } else {
        curve.last_maturity()
    };
    if end < MIN_CLASSIFY_HORIZON {
        return CurveClassification {
            class: AsymptoticClass::Undetermined,
            window: None,
            exponential_fit: None,
            pareto_fit: None,
            ambiguous: false,
            note: Some(format!(
                "curve data end at {end} years; at least {MIN_CLASSIFY_HORIZON} years (or a tail model) are needed"
            )),
        };
    }
    let ts = geometric_grid(end / 10.0, end, 40);
    let ys: Vec<f64> = match ts.iter().map(|&t| curve.log_discount(t).map(|l| -l)).collect::<Result<Vec<_>>>() {
        Ok(ys) => ys,
        Err(e) => {
            return CurveClassification {
                class: AsymptoticClass::Undetermined,
                window: Some((end / 10.0, end)),
                exponential_fit: None,
                pareto_fit: None,
                ambiguous: false,
                note: Some(format!("curve not evaluable on the tail window: {e}")),
            }
        }
    };
    let log_ts: Vec<f64> = ts.iter().map(|t| t.ln()).collect();

    let fit = |xs: &[f64]| {
        let (slope, intercept, residual) = linear_fit(xs, &ys);
        FitDiagnostics { slope, intercept, residual, accepted: slope > 0.0 && residual < FIT_RESIDUAL }
    };
    let exp_fit = fit(&ts);
    let par_fit = fit(&log_ts);

    let exp_class = || AsymptoticClass::ExponentialType { rate: exp_fit.slope };
    let par_class = || {
        let index = par_fit.slope;
        AsymptoticClass::TailParetoType { index, rate: index * (par_fit.intercept / index).exp() }
    };
    let (class, ambiguous, note) = match (exp_fit.accepted, par_fit.accepted) {
        (true, true) if exp_fit.residual <= par_fit.residual => (exp_class(), true, None),
        (true, true) => (par_class(), true, None),
        (true, false) => (exp_class(), false, None),
        (false, true) => (par_class(), false, None),
        (false, false) => (
            AsymptoticClass::Undetermined,
            false,
            Some(format!(
                "neither shape fits: residuals {:.3e} (exponential), {:.3e} (tail-Pareto), threshold {FIT_RESIDUAL:e}",
                exp_fit.residual, par_fit.residual
            )),
        ),
    };
    CurveClassification {
        class,
        window: Some((end / 10.0, end)),
        exponential_fit: Some(exp_fit),
        pareto_fit: Some(par_fit),
        ambiguous,
        note,
    }
}

/// A long rate that is either a number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LongRate {
    Finite(f64),
    Divergent,
}

impl LongRate {
    pub fn value(self) -> f64 {
        match self {
            LongRate::Finite(v) => v,
            LongRate::Divergent => f64::INFINITY,
        }
    }
}

impl Serialize for LongRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LongRate::Finite(v) => s.serialize_f64(*v),
            LongRate::Divergent => s.serialize_str("DIVERGENT"),
        }
    }
}

/// Long rate at time `t` of a deterministic curve, propagated in closed form
/// from its asymptotic class: the exponential long rate is constant in `t`,
/// and a tail-Pareto long rate of the curve's own index scales as
/// `L^(λ)_{t∞} = P_{0t}^(1/λ) L^(λ)_{0∞}`. Conventions that are too coarse
/// give 0, conventions that are too fine give [`LongRate::Divergent`].
pub fn deterministic_long_rate(curve: &DiscountCurve, t: f64, convention: RateConvention) -> Result<LongRate> {
    convention.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("valuation time must be finite and nonnegative, got {t}")));
    }
    let class = match curve.tail() {
        Some(TailModel::Exponential { rate }) => AsymptoticClass::ExponentialType { rate },
        Some(TailModel::TailPareto { index, .. }) => {
            AsymptoticClass::TailParetoType { index, rate: curve.tail_long_rate().expect("tail present") }
        }
        None => classify_curve(curve).class,
    };
    match class {
        AsymptoticClass::Undetermined => {
            Err(Error::Unsupported("curve has no recognisable asymptotic class; attach a tail model".into()))
        }
        AsymptoticClass::ExponentialType { rate } => {
            if !(rate > 0.0) {
                return Err(Error::invalid(format!(
                    "exponential long rate {rate} <= 0: discount factors do not tend to zero"
                )));
            }
            Ok(match convention {
                RateConvention::Exponential => LongRate::Finite(rate),
                RateConvention::ZeroCoupon(k) => LongRate::Finite(k * (rate / k).exp_m1()),
                RateConvention::Libor | RateConvention::TailPareto(_) => LongRate::Divergent,
            })
        }
        AsymptoticClass::TailParetoType { index, rate } => {
            let p0t = curve.discount(t)?;
            Ok(match convention {
                RateConvention::Exponential | RateConvention::ZeroCoupon(_) => LongRate::Finite(0.0),
                c => {
                    let lambda = c.pareto_index().expect("pareto-family convention");
                    if (lambda - index).abs() <= 1e-9 * index {
                        LongRate::Finite(p0t.powf(1.0 / index) * rate)
                    } else if lambda > index {
                        LongRate::Finite(0.0)
                    } else {
                        LongRate::Divergent
                    }
                }
            })
        }
    }
}
