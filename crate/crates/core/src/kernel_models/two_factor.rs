//! Two-factor rational kernel `π_t = a_t + b_t M_t + c_t N_t` with tail index 1.

use super::{check_time, degenerate, log_add, CoefficientFunction, ModelState};
use crate::error::{Error, Result};
use crate::montecarlo::MartingaleDriver;

#[derive(Debug, Clone)]
pub struct TwoFactorModel {
    a: CoefficientFunction,
    b: CoefficientFunction,
    c: CoefficientFunction,
    driver_m: MartingaleDriver,
    driver_n: MartingaleDriver,
    correlation: f64,
}

/// Coefficients of `P_{tT} = F + G r_t + H / L_{t∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FghCoefficients {
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

impl FghCoefficients {
    pub fn bond(&self, short_rate: f64, long_rate: f64) -> f64 {
        self.f + self.g * short_rate + self.h / long_rate
    }
}

impl TwoFactorModel {
    pub fn new(
        a: CoefficientFunction,
        b: CoefficientFunction,
        c: CoefficientFunction,
        driver_m: MartingaleDriver,
        driver_n: MartingaleDriver,
        correlation: f64,
    ) -> Result<Self> {
        for (name, f) in [("a", &a), ("b", &b), ("c", &c)] {
            if (f.index() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!(
                    "two-factor models use tail index 1, coefficient {name} has {}",
                    f.index()
                )));
            }
        }
        if !(a.tail_limit() + b.tail_limit() + c.tail_limit() > 0.0) {
            return Err(Error::invalid("tail limits of a, b and c are all zero"));
        }
        if !(correlation.is_finite() && (-1.0..=1.0).contains(&correlation)) {
            return Err(Error::invalid(format!("correlation must lie in [-1, 1], got {correlation}")));
        }
        Ok(TwoFactorModel { a, b, c, driver_m, driver_n, correlation })
    }

    pub fn coefficients(&self) -> [&CoefficientFunction; 3] {
        [&self.a, &self.b, &self.c]
    }

    pub fn drivers(&self) -> (&MartingaleDriver, &MartingaleDriver) {
        (&self.driver_m, &self.driver_n)
    }

    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    pub fn lambda(&self) -> f64 {
        1.0
    }

    fn factors(&self, state: &ModelState) -> Result<(f64, f64)> {
        state.require_factors(2)?;
        Ok((state.m, state.n.expect("checked two factors")))
    }

    pub fn kernel(&self, t: f64, m: f64, n: f64) -> f64 {
        self.a.value(t) + self.b.value(t) * m + self.c.value(t) * n
    }

    pub fn log_numerator(&self, u: f64, m: f64, n: f64) -> f64 {
        log_add(log_add(self.a.log_value(u), self.b.log_value(u) + m.ln()), self.c.log_value(u) + n.ln())
    }

    pub fn expected_kernel(&self, t: f64) -> f64 {
        self.a.value(t) + self.b.value(t) + self.c.value(t)
    }

    pub fn log_bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        let (m, n) = self.factors(state)?;
        check_time(state.t, maturity)?;
        Ok(self.log_numerator(maturity, m, n) - self.log_numerator(state.t, m, n))
    }

    pub fn bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        self.log_bond_price(state, maturity).map(f64::exp)
    }

    pub fn short_rate(&self, state: &ModelState) -> Result<f64> {
        let (m, n) = self.factors(state)?;
        let t = state.t;
        let num = self.a.derivative(t)? + self.b.derivative(t)? * m + self.c.derivative(t)? * n;
        Ok(-num / self.kernel(t, m, n))
    }

    /// `L_{t∞} = (a_t + b_t M_t + c_t N_t) / (a + b M_t + c N_t)`.
    pub fn long_libor(&self, state: &ModelState) -> Result<f64> {
        let (m, n) = self.factors(state)?;
        Ok(self.kernel(state.t, m, n) / self.theta(m, n))
    }

    /// `a + b M + c N`.
    pub fn theta(&self, m: f64, n: f64) -> f64 {
        self.a.tail_limit() + self.b.tail_limit() * m + self.c.tail_limit() * n
    }

    /// Solves `F (a_t, b_t, c_t) - G (a'_t, b'_t, c'_t) + H (a, b, c) = (a_T, b_T, c_T)`
    /// by Cramer's rule, so that `P_{tT} = F + G r_t + H / L_{t∞}` for every state at `t`.
    pub fn fgh_coefficients(&self, t: f64, maturity: f64) -> Result<FghCoefficients> {
        check_time(t, maturity)?;
        let (at, bt, ct) = (self.a.value(t), self.b.value(t), self.c.value(t));
        let (da, db, dc) = (self.a.derivative(t)?, self.b.derivative(t)?, self.c.derivative(t)?);
        let (a, b, c) = (self.a.tail_limit(), self.b.tail_limit(), self.c.tail_limit());
        let (a_big, b_big, c_big) = (self.a.value(maturity), self.b.value(maturity), self.c.value(maturity));

        let terms = [(bt * c - ct * b) * da, (ct * a - at * c) * db, (at * b - bt * a) * dc];
        let d: f64 = terms.iter().sum();
        let scale: f64 = [bt * c * da, ct * b * da, ct * a * db, at * c * db, at * b * dc, bt * a * dc]
            .iter()
            .map(|v| v.abs())
            .sum();
        if degenerate(d, scale) {
            return Err(Error::NoDecomposition { t });
        }
        let f = ((b * dc - c * db) * a_big + (c * da - a * dc) * b_big + (a * db - b * da) * c_big) / d;
        let g = ((b * ct - c * bt) * a_big + (c * at - a * ct) * b_big + (a * bt - b * at) * c_big) / d;
        let h = ((db * ct - dc * bt) * a_big + (dc * at - da * ct) * b_big + (da * bt - db * at) * c_big) / d;
        Ok(FghCoefficients { f, g, h })
    }
}
