use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CoefficientFunction;
use crate::error::{Error, Result};
use crate::termstructure::DiscountCurve;

/// Time-dependent weights `w_i(t) = w_i^∞ + (w_i^0 - w_i^∞) exp(-k t)` splitting
/// an initial curve among the coefficients `a, b (, c)`.
///
/// Both weight vectors sum to one, so the weights sum to one at every `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSplit {
    pub initial: Vec<f64>,
    pub terminal: Vec<f64>,
    #[serde(default)]
    pub decay: f64,
}

impl CurveSplit {
    /// Time-independent weights.
    pub fn constant(weights: Vec<f64>) -> Self {
        CurveSplit { initial: weights.clone(), terminal: weights, decay: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        let k = self.initial.len();
        if !(k == 2 || k == 3) || self.terminal.len() != k {
            return Err(Error::invalid(format!(
                "split needs 2 or 3 weights at both ends, got {} and {}",
                self.initial.len(),
                self.terminal.len()
            )));
        }
        for ws in [&self.initial, &self.terminal] {
            if let Some(w) = ws.iter().find(|w| !(w.is_finite() && **w > 0.0 && **w < 1.0)) {
                return Err(Error::invalid(format!(
                    "split weights must lie strictly between 0 and 1 (every coefficient positive), got {w}"
                )));
            }
            let total: f64 = ws.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("split weights must sum to 1, got {total}")));
            }
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            return Err(Error::invalid(format!("split decay must be nonnegative, got {}", self.decay)));
        }
        Ok(())
    }
}

/// Coefficients `w_i(t) P_{0t}` reproducing `P_{0t} = a_t + b_t (+ c_t)` at `M = N = 1`.
///
/// The curve must carry a tail model so that each coefficient has a definite
/// tail limit under `index`.
pub fn fit_initial_curve(curve: Arc<DiscountCurve>, split: &CurveSplit, index: f64) -> Result<Vec<CoefficientFunction>> {
    split.validate()?;
    let coefficients = split
        .initial
        .iter()
        .zip(&split.terminal)
        .map(|(&w0, &w1)| CoefficientFunction::curve_weighted(curve.clone(), w0, w1, split.decay, index))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = coefficients.iter().map(|c| c.tail_limit()).sum();
    if !(total > 0.0) {
        return Err(Error::invalid(format!(
            "curve tail decays faster than index {index}: all tail limits vanish"
        )));
    }
    Ok(coefficients)
}
