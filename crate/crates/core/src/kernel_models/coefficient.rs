//! Deterministic coefficient functions `a_t, b_t, c_t` of rational kernels.
//!
//! A coefficient function is strictly positive, continuously differentiable,
//! and decays like `ℓ t^(-λ)` for a declared tail index `λ` and tail limit
//! `ℓ = lim t^λ f(t) >= 0`. Every family below knows its tail limit exactly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::termstructure::{DiscountCurve, TailModel};

/// Far point at which a declared tail limit is checked numerically.
pub const TAIL_PROBE: f64 = 1e6;

/// Relative tolerance for `|t^λ f(t) - ℓ|` at [`TAIL_PROBE`].
pub const TAIL_TOLERANCE: f64 = 1e-3;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Family {
    /// `A / (s + t)^p`
    Rational { scale: f64, shift: f64, power: f64 },
    /// `A exp(-k t) / (s + t)^p`
    ExpRational { scale: f64, decay: f64, shift: f64, power: f64 },
    /// `w(t) P_{0t}` with `w(t) = w_∞ + (w_0 - w_∞) exp(-k t)`.
    CurveWeighted { curve: Arc<DiscountCurve>, initial: f64, terminal: f64, decay: f64 },
    Custom { value: ScalarFn, derivative: Option<ScalarFn> },
}

#[derive(Clone)]
pub struct CoefficientFunction {
    family: Family,
    index: f64,
    tail_limit: f64,
}

impl fmt::Debug for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.family {
            Family::Rational { scale, shift, power } => format!("Rational({scale}/({shift}+t)^{power})"),
            Family::ExpRational { scale, decay, shift, power } => {
                format!("ExpRational({scale}e^(-{decay}t)/({shift}+t)^{power})")
            }
            Family::CurveWeighted { initial, terminal, decay, .. } => {
                format!("CurveWeighted(w0={initial}, w_inf={terminal}, k={decay})")
            }
            Family::Custom { .. } => "Custom".to_string(),
        };
        f.debug_struct("CoefficientFunction")
            .field("family", &name)
            .field("index", &self.index)
            .field("tail_limit", &self.tail_limit)
            .finish()
    }
}

fn check_index(index: f64) -> Result<()> {
    if index.is_finite() && index > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("tail index must be finite and positive, got {index}")))
    }
}

fn power_tail_limit(scale: f64, power: f64, index: f64) -> Result<f64> {
    if power == index {
        Ok(scale)
    } else if power > index {
        Ok(0.0)
    } else {
        Err(Error::invalid(format!(
            "t^{index} f(t) diverges for a power-{power} decay; the power must be at least the tail index"
        )))
    }
}

impl CoefficientFunction {
    /// `scale / (shift + t)^power`.
    pub fn rational(scale: f64, shift: f64, power: f64, index: f64) -> Result<Self> {
        check_index(index)?;
        positive_param("scale", scale)?;
        positive_param("shift", shift)?;
        nonnegative_param("power", power)?;
        let tail_limit = power_tail_limit(scale, power, index)?;
        CoefficientFunction { family: Family::Rational { scale, shift, power }, index, tail_limit }.validated()
    }

    /// `scale exp(-decay t) / (shift + t)^power`.
    pub fn exp_rational(scale: f64, decay: f64, shift: f64, power: f64, index: f64) -> Result<Self> {
        check_index(index)?;
        positive_param("scale", scale)?;
        nonnegative_param("decay", decay)?;
        positive_param("shift", shift)?;
        nonnegative_param("power", power)?;
        let tail_limit = if decay > 0.0 { 0.0 } else { power_tail_limit(scale, power, index)? };
        CoefficientFunction { family: Family::ExpRational { scale, decay, shift, power }, index, tail_limit }
            .validated()
    }

    /// `w(t) P_{0t}` with `w(t) = terminal + (initial - terminal) exp(-decay t)`.
    ///
    /// The tail limit needs the curve's asymptotic model: an exponential tail
    /// gives zero, a tail-Pareto tail of the same index gives
    /// `terminal * lim t^λ P_{0t}`.
    pub fn curve_weighted(curve: Arc<DiscountCurve>, initial: f64, terminal: f64, decay: f64, index: f64) -> Result<Self> {
        check_index(index)?;
        for (name, w) in [("initial weight", initial), ("terminal weight", terminal)] {
            if !(w.is_finite() && w > 0.0 && w < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {w}")));
            }
        }
        nonnegative_param("weight decay", decay)?;
        let tail = curve.tail().ok_or_else(|| {
            Error::invalid("curve needs a tail model to fix the tail limit of its coefficients")
        })?;
        let tail_limit = match tail {
            TailModel::Exponential { rate } if rate > 0.0 => 0.0,
            TailModel::Exponential { rate } => {
                return Err(Error::invalid(format!(
                    "exponential tail rate {rate} <= 0 does not decay; coefficients would leave the admissible class"
                )))
            }
            TailModel::TailPareto { index: tail_index, rate } => {
                if (tail_index - index).abs() <= 1e-12 * index {
                    // t^λ P_{0t} -> C (λ/L)^λ, C = P(T_n) (1 + L T_n / λ)^λ
                    let last = curve.last_maturity();
                    let ln_c = curve.log_discount(last)? + index * (rate * last / index).ln_1p();
                    terminal * (ln_c + index * (index / rate).ln()).exp()
                } else if tail_index > index {
                    0.0
                } else {
                    return Err(Error::invalid(format!(
                        "curve tail index {tail_index} is below the model index {index}: tail limit diverges"
                    )));
                }
            }
        };
        CoefficientFunction { family: Family::CurveWeighted { curve, initial, terminal, decay }, index, tail_limit }
            .validated()
    }

    /// User-supplied function. Without a derivative, short-rate operations on
    /// models built from it return [`Error::Unsupported`].
    pub fn custom(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
        index: f64,
        tail_limit: f64,
    ) -> Result<Self> {
        check_index(index)?;
        if !(tail_limit.is_finite() && tail_limit >= 0.0) {
            return Err(Error::invalid(format!("tail limit must be finite and nonnegative, got {tail_limit}")));
        }
        let family = Family::Custom { value: Arc::new(value), derivative: derivative.map(Arc::from) };
        CoefficientFunction { family, index, tail_limit }.validated()
    }

    fn validated(self) -> Result<Self> {
        let mut probes = vec![0.0];
        probes.extend((-3..=6).flat_map(|k| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(k))));
        for t in probes {
            let v = self.value(t);
            if !(v.is_finite() && v > 0.0) && !(t > 1e3 && v == 0.0 && self.tail_limit == 0.0) {
                return Err(Error::invalid(format!("coefficient must be positive and finite, f({t}) = {v}")));
            }
        }
        let scaled = (self.index * TAIL_PROBE.ln() + self.log_value(TAIL_PROBE)).exp();
        let tol = TAIL_TOLERANCE * self.tail_limit.max(1.0);
        if !((scaled - self.tail_limit).abs() <= tol) {
            return Err(Error::invalid(format!(
                "t^{} f(t) = {scaled} at t = {TAIL_PROBE} is not within {tol} of the declared tail limit {}",
                self.index, self.tail_limit
            )));
        }
        Ok(self)
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    /// `ℓ = lim t^λ f(t)`.
    pub fn tail_limit(&self) -> f64 {
        self.tail_limit
    }

    /// `ℓ λ^(-λ)`, the constant appearing in tail-Pareto long rates.
    pub fn scaled_tail_limit(&self) -> f64 {
        self.tail_limit * (-self.index * self.index.ln()).exp()
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.family {
            Family::Custom { value, .. } => value(t),
            _ => self.log_value(t).exp(),
        }
    }

    /// `ln f(t)`, evaluated without forming `f(t)` for the closed-form families.
    pub fn log_value(&self, t: f64) -> f64 {
        match &self.family {
            Family::Rational { scale, shift, power } => scale.ln() - power * (shift + t).ln(),
            Family::ExpRational { scale, decay, shift, power } => scale.ln() - decay * t - power * (shift + t).ln(),
            Family::CurveWeighted { curve, initial, terminal, decay } => {
                let w = terminal + (initial - terminal) * (-decay * t).exp();
                w.ln() + curve.log_discount(t).unwrap_or(f64::NAN)
            }
            Family::Custom { value, .. } => value(t).ln(),
        }
    }

    /// `f'(t)`. Curve-weighted coefficients use the right derivative at grid points.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match &self.family {
            Family::Rational { shift, power, .. } => Ok(-power / (shift + t) * self.value(t)),
            Family::ExpRational { decay, shift, power, .. } => Ok(-(decay + power / (shift + t)) * self.value(t)),
            Family::CurveWeighted { curve, initial, terminal, decay } => {
                let e = (-decay * t).exp();
                let w = terminal + (initial - terminal) * e;
                let dw = -decay * (initial - terminal) * e;
                let p = curve.discount(t)?;
                Ok(dw * p - w * p * instantaneous_forward(curve, t)?)
            }
            Family::Custom { derivative: Some(d), .. } => Ok(d(t)),
            Family::Custom { derivative: None, .. } => {
                Err(Error::Unsupported("coefficient function has no derivative".into()))
            }
        }
    }

    pub fn has_derivative(&self) -> bool {
        !matches!(self.family, Family::Custom { derivative: None, .. })
    }
}

/// Right-continuous instantaneous forward rate of a log-linear curve.
fn instantaneous_forward(curve: &DiscountCurve, t: f64) -> Result<f64> {
    let grid = curve.grid();
    let last = curve.last_maturity();
    if t >= last {
        return match curve.tail() {
            Some(TailModel::Exponential { rate }) => Ok(rate),
            Some(TailModel::TailPareto { index, rate }) => Ok(rate / (1.0 + rate * t / index)),
            None => Err(Error::OutOfHorizon { requested: t, horizon: last }),
        };
    }
    let j = grid.partition_point(|&g| g <= t);
    let (t0, t1) = (grid[j - 1], grid[j]);
    Ok(-(curve.log_discount(t1)? - curve.log_discount(t0)?) / (t1 - t0))
}

fn positive_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and positive, got {v}")))
    }
}

fn nonnegative_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")))
    }
}
