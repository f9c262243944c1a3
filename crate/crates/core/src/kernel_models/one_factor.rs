//! One-factor rational kernel `π_t = a_t + b_t M_t`.

use super::{check_time, degenerate, log_add, CoefficientFunction, ModelState};
use crate::error::{Error, Result};
use crate::montecarlo::MartingaleDriver;

#[derive(Debug, Clone)]
pub struct OneFactorModel {
    a: CoefficientFunction,
    b: CoefficientFunction,
    driver: MartingaleDriver,
    lambda: f64,
}

impl OneFactorModel {
    pub fn new(a: CoefficientFunction, b: CoefficientFunction, driver: MartingaleDriver) -> Result<Self> {
        let lambda = a.index();
        if (b.index() - lambda).abs() > 1e-12 * lambda {
            return Err(Error::invalid(format!(
                "coefficients must share one tail index, got {} and {}",
                lambda,
                b.index()
            )));
        }
        if !(a.tail_limit() + b.tail_limit() > 0.0) {
            return Err(Error::invalid(
                "tail limits of a and b are both zero: kernel decays faster than the declared index",
            ));
        }
        Ok(OneFactorModel { a, b, driver, lambda })
    }

    pub fn a(&self) -> &CoefficientFunction {
        &self.a
    }

    pub fn b(&self) -> &CoefficientFunction {
        &self.b
    }

    pub fn driver(&self) -> &MartingaleDriver {
        &self.driver
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(ā, b̄) = (a, b) λ^(-λ)`.
    pub fn scaled_tail_limits(&self) -> (f64, f64) {
        (self.a.scaled_tail_limit(), self.b.scaled_tail_limit())
    }

    pub fn state(&self, t: f64, m: f64) -> Result<ModelState> {
        ModelState::one_factor(t, m)
    }

    fn factor(&self, state: &ModelState) -> Result<f64> {
        state.require_factors(1)?;
        Ok(state.m)
    }

    /// `π_t = a_t + b_t M_t`.
    pub fn kernel(&self, t: f64, m: f64) -> f64 {
        self.a.value(t) + self.b.value(t) * m
    }

    /// `ln(a_u + b_u M)`.
    pub fn log_numerator(&self, u: f64, m: f64) -> f64 {
        log_add(self.a.log_value(u), self.b.log_value(u) + m.ln())
    }

    /// `E[π_t] = a_t + b_t`.
    pub fn expected_kernel(&self, t: f64) -> f64 {
        self.a.value(t) + self.b.value(t)
    }

    /// `ln P_{tT} = ln(a_T + b_T M_t) - ln(a_t + b_t M_t)`.
    pub fn log_bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        let m = self.factor(state)?;
        check_time(state.t, maturity)?;
        Ok(self.log_numerator(maturity, m) - self.log_numerator(state.t, m))
    }

    pub fn bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        self.log_bond_price(state, maturity).map(f64::exp)
    }

    /// `r_t = -(a'_t + b'_t M_t) / (a_t + b_t M_t)`.
    pub fn short_rate(&self, state: &ModelState) -> Result<f64> {
        let m = self.factor(state)?;
        let t = state.t;
        Ok(-(self.a.derivative(t)? + self.b.derivative(t)? * m) / self.kernel(t, m))
    }

    /// `L_{t∞} = (a_t + b_t M_t) / (a + b M_t)`; only defined for tail index 1.
    pub fn long_libor(&self, state: &ModelState) -> Result<f64> {
        if (self.lambda - 1.0).abs() > 1e-12 {
            return Err(Error::WrongIndex { found: self.lambda });
        }
        let m = self.factor(state)?;
        Ok(self.kernel(state.t, m) / (self.a.tail_limit() + self.b.tail_limit() * m))
    }

    /// `L^(λ)_{t∞} = ((a_t + b_t M_t) / (ā + b̄ M_t))^(1/λ)`.
    pub fn long_pareto(&self, state: &ModelState) -> Result<f64> {
        let m = self.factor(state)?;
        let (ab, bb) = self.scaled_tail_limits();
        Ok((self.kernel(state.t, m) / (ab + bb * m)).powf(1.0 / self.lambda))
    }

    /// `θ_t = λ^λ (ā + b̄ M_t) = a + b M_t`.
    pub fn theta(&self, m: f64) -> f64 {
        self.a.tail_limit() + self.b.tail_limit() * m
    }

    /// Open interval of short rates reachable at `t` as `M` runs over `(0, ∞)`,
    /// as `(rate at M→0, rate at M→∞)`.
    pub fn short_rate_limits(&self, t: f64) -> Result<(f64, f64)> {
        Ok((-self.a.derivative(t)? / self.a.value(t), -self.b.derivative(t)? / self.b.value(t)))
    }

    /// Endpoints of the reachable long-rate interval `(M→0, M→∞)`; infinite when a scaled tail limit is zero.
    pub fn long_rate_limits(&self, t: f64) -> (f64, f64) {
        let (ab, bb) = self.scaled_tail_limits();
        let inv = 1.0 / self.lambda;
        let at_zero = if ab > 0.0 { (self.a.value(t) / ab).powf(inv) } else { f64::INFINITY };
        let at_inf = if bb > 0.0 { (self.b.value(t) / bb).powf(inv) } else { f64::INFINITY };
        (at_zero, at_inf)
    }

    /// Factor value reproducing the short rate `r` at time `t`.
    pub fn state_from_short_rate(&self, t: f64, r: f64) -> Result<ModelState> {
        check_time(t, t)?;
        let (a, b) = (self.a.value(t), self.b.value(t));
        let (da, db) = (self.a.derivative(t)?, self.b.derivative(t)?);
        let w = a * db - b * da;
        if degenerate(w, (a * db).abs() + (b * da).abs()) {
            return Err(Error::NoInverse { t });
        }
        let m = -(da + r * a) / (db + r * b);
        if !(m.is_finite() && m > 0.0) {
            let (x, y) = self.short_rate_limits(t)?;
            return Err(Error::OutsideRange { value: r, lo: x.min(y), hi: x.max(y), t });
        }
        ModelState::one_factor(t, m)
    }

    /// Factor value reproducing the long rate `L^(λ)_{t∞}` (Libor when λ = 1).
    pub fn state_from_long_rate(&self, t: f64, long_rate: f64) -> Result<ModelState> {
        check_time(t, t)?;
        let (a, b) = (self.a.value(t), self.b.value(t));
        let (ab, bb) = self.scaled_tail_limits();
        if degenerate(a * bb - b * ab, (a * bb).abs() + (b * ab).abs()) {
            return Err(Error::NoInverse { t });
        }
        let (x, y) = self.long_rate_limits(t);
        let outside = || Error::OutsideRange { value: long_rate, lo: x.min(y), hi: x.max(y), t };
        if !(long_rate.is_finite() && long_rate > 0.0) {
            return Err(outside());
        }
        let p = long_rate.powf(self.lambda);
        let m = (p * ab - a) / (b - p * bb);
        if !(m.is_finite() && m > 0.0) {
            return Err(outside());
        }
        ModelState::one_factor(t, m)
    }

    /// `P_{tT}` as an affine function of the short rate:
    /// `[(a_T b'_t - b_T a'_t) + (a_T b_t - b_T a_t) r] / (a_t b'_t - b_t a'_t)`.
    pub fn bond_from_short_rate(&self, t: f64, maturity: f64, r: f64) -> Result<f64> {
        self.state_from_short_rate(t, r)?;
        check_time(t, maturity)?;
        let (at, bt) = (self.a.value(t), self.b.value(t));
        let (da, db) = (self.a.derivative(t)?, self.b.derivative(t)?);
        let (a_big, b_big) = (self.a.value(maturity), self.b.value(maturity));
        Ok(((a_big * db - b_big * da) + (a_big * bt - b_big * at) * r) / (at * db - bt * da))
    }

    /// `P_{tT}` as an affine function of `(L^(λ)_{t∞})^(-λ)`:
    /// `[(a_T b̄ - b_T ā) + (a_t b_T - b_t a_T) L^(-λ)] / (a_t b̄ - b_t ā)`.
    pub fn bond_from_long_rate(&self, t: f64, maturity: f64, long_rate: f64) -> Result<f64> {
        self.state_from_long_rate(t, long_rate)?;
        check_time(t, maturity)?;
        let (at, bt) = (self.a.value(t), self.b.value(t));
        let (ab, bb) = self.scaled_tail_limits();
        let (a_big, b_big) = (self.a.value(maturity), self.b.value(maturity));
        let y = long_rate.powf(-self.lambda);
        Ok(((a_big * bb - b_big * ab) + (at * b_big - bt * a_big) * y) / (at * bb - bt * ab))
    }
}
