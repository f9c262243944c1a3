//! Rational pricing-kernel models.
//!
//! The kernel is affine in one or two positive unit-mean martingales,
//! `π_t = a_t + b_t M_t (+ c_t N_t)`, so bond prices
//! `P_{tT} = E_t[π_T] / π_t` are ratios of affine expressions in the current
//! factor values. Short rates, long rates and their inversions follow in
//! closed form.

mod coefficient;
mod config;
mod fit;
mod one_factor;
mod two_factor;

pub use coefficient::{CoefficientFunction, TAIL_PROBE, TAIL_TOLERANCE};
pub use config::{CoefficientSpec, FamilySpec, ModelConfig, RunSpec};
pub use fit::{fit_initial_curve, CurveSplit};
pub use one_factor::OneFactorModel;
pub use two_factor::{FghCoefficients, TwoFactorModel};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::montecarlo::MartingaleDriver;
use crate::termstructure::BondEvaluator;

/// Relative size below which a determinant is treated as zero.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

/// Time and factor values of a rational model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelState {
    pub t: f64,
    pub m: f64,
    pub n: Option<f64>,
}

impl ModelState {
    pub fn one_factor(t: f64, m: f64) -> Result<Self> {
        let s = ModelState { t, m, n: None };
        s.validate()?;
        Ok(s)
    }

    pub fn two_factor(t: f64, m: f64, n: f64) -> Result<Self> {
        let s = ModelState { t, m, n: Some(n) };
        s.validate()?;
        Ok(s)
    }

    /// `t = 0`, all factors at their initial value 1.
    pub fn initial(factors: usize) -> Self {
        ModelState { t: 0.0, m: 1.0, n: (factors == 2).then_some(1.0) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(Error::invalid(format!("state time must be finite and nonnegative, got {}", self.t)));
        }
        for v in std::iter::once(self.m).chain(self.n) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("factor values must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn factors(&self) -> usize {
        if self.n.is_some() {
            2
        } else {
            1
        }
    }

    fn require_factors(&self, k: usize) -> Result<()> {
        self.validate()?;
        if self.factors() != k {
            return Err(Error::invalid(format!(
                "state carries {} factor value(s) but the model has {k}",
                self.factors()
            )));
        }
        Ok(())
    }

    /// Stable 64-bit fingerprint of the state, used to derive sub-simulation seeds.
    pub fn fingerprint(&self) -> u64 {
        let mut h = crate::numeric::mix_seed(self.t.to_bits(), self.m.to_bits());
        if let Some(n) = self.n {
            h = crate::numeric::mix_seed(h, n.to_bits());
        }
        h
    }
}

fn check_time(t: f64, maturity: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("time must be finite and nonnegative, got {t}")));
    }
    if !(maturity.is_finite() && maturity >= t) {
        return Err(Error::invalid(format!("maturity must be finite and at least t = {t}, got {maturity}")));
    }
    Ok(())
}

fn degenerate(value: f64, scale: f64) -> bool {
    value.abs() <= DEGENERACY_TOLERANCE * scale || scale == 0.0
}

/// `ln(e^x + e^y)`.
fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Either rational model.
#[derive(Debug, Clone)]
pub enum RationalModel {
    OneFactor(OneFactorModel),
    TwoFactor(TwoFactorModel),
}

impl From<OneFactorModel> for RationalModel {
    fn from(m: OneFactorModel) -> Self {
        RationalModel::OneFactor(m)
    }
}

impl From<TwoFactorModel> for RationalModel {
    fn from(m: TwoFactorModel) -> Self {
        RationalModel::TwoFactor(m)
    }
}

impl RationalModel {
    pub fn factors(&self) -> usize {
        match self {
            RationalModel::OneFactor(_) => 1,
            RationalModel::TwoFactor(_) => 2,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            RationalModel::OneFactor(m) => m.lambda(),
            RationalModel::TwoFactor(m) => m.lambda(),
        }
    }

    pub fn drivers(&self) -> Vec<&MartingaleDriver> {
        match self {
            RationalModel::OneFactor(m) => vec![m.driver()],
            RationalModel::TwoFactor(m) => {
                let (dm, dn) = m.drivers();
                vec![dm, dn]
            }
        }
    }

    pub fn correlation(&self) -> f64 {
        match self {
            RationalModel::OneFactor(_) => 0.0,
            RationalModel::TwoFactor(m) => m.correlation(),
        }
    }

    pub fn initial_state(&self) -> ModelState {
        ModelState::initial(self.factors())
    }

    /// Builds a state with the right number of factors; `n` is ignored for one-factor models.
    pub fn state(&self, t: f64, m: f64, n: f64) -> Result<ModelState> {
        match self {
            RationalModel::OneFactor(_) => ModelState::one_factor(t, m),
            RationalModel::TwoFactor(_) => ModelState::two_factor(t, m, n),
        }
    }

    pub fn kernel(&self, t: f64, m: f64, n: Option<f64>) -> f64 {
        match self {
            RationalModel::OneFactor(x) => x.kernel(t, m),
            RationalModel::TwoFactor(x) => x.kernel(t, m, n.unwrap_or(1.0)),
        }
    }

    pub fn expected_kernel(&self, t: f64) -> f64 {
        match self {
            RationalModel::OneFactor(x) => x.expected_kernel(t),
            RationalModel::TwoFactor(x) => x.expected_kernel(t),
        }
    }

    pub fn log_bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        match self {
            RationalModel::OneFactor(x) => x.log_bond_price(state, maturity),
            RationalModel::TwoFactor(x) => x.log_bond_price(state, maturity),
        }
    }

    pub fn bond_price(&self, state: &ModelState, maturity: f64) -> Result<f64> {
        self.log_bond_price(state, maturity).map(f64::exp)
    }

    pub fn short_rate(&self, state: &ModelState) -> Result<f64> {
        match self {
            RationalModel::OneFactor(x) => x.short_rate(state),
            RationalModel::TwoFactor(x) => x.short_rate(state),
        }
    }

    /// Closed-form long rate in the model's own index (Libor for index 1).
    pub fn long_rate(&self, state: &ModelState) -> Result<f64> {
        match self {
            RationalModel::OneFactor(x) => x.long_pareto(state),
            RationalModel::TwoFactor(x) => x.long_libor(state),
        }
    }

    /// `θ_t`, the limit of `T^λ P_{tT} π_t`.
    pub fn theta(&self, m: f64, n: Option<f64>) -> f64 {
        match self {
            RationalModel::OneFactor(x) => x.theta(m),
            RationalModel::TwoFactor(x) => x.theta(m, n.unwrap_or(1.0)),
        }
    }

    /// Bond prices with the factor values frozen at `state`, as a function of `(t, T)`.
    pub fn evaluator_at(&self, state: ModelState) -> StateBonds<'_> {
        StateBonds { model: self, m: state.m, n: state.n }
    }
}

/// [`BondEvaluator`] for a rational model with fixed factor values.
pub struct StateBonds<'a> {
    model: &'a RationalModel,
    m: f64,
    n: Option<f64>,
}

impl BondEvaluator for StateBonds<'_> {
    fn log_bond(&self, t: f64, maturity: f64) -> Result<f64> {
        let state = ModelState { t, m: self.m, n: self.n };
        self.model.log_bond_price(&state, maturity)
    }
}
