//! Discount factors, the four rate conventions and the curves that carry them.

mod curve;
mod rates;

pub use curve::{DiscountCurve, TailModel};
pub use rates::{
    convert_rate, discount_from_rate, exponential_from_zero_coupon, log_discount_from_rate, ordering_audit,
    rate_from_discount, rate_from_log_discount, zero_coupon_from_exponential, OrderingReport, RateConvention,
    RateQuote, Tenor,
};

use crate::error::Result;

/// Anything that prices zero-coupon bonds `P_{tT}`.
///
/// Implementors return the logarithm so that very long maturities, where
/// `P_{tT}` underflows, still produce usable rates.
pub trait BondEvaluator {
    fn log_bond(&self, t: f64, maturity: f64) -> Result<f64>;

    fn bond(&self, t: f64, maturity: f64) -> Result<f64> {
        self.log_bond(t, maturity).map(f64::exp)
    }
}

impl<E: BondEvaluator + ?Sized> BondEvaluator for &E {
    fn log_bond(&self, t: f64, maturity: f64) -> Result<f64> {
        (**self).log_bond(t, maturity)
    }
}

/// Adapts a closure `(t, T) -> ln P_{tT}` to [`BondEvaluator`].
pub struct LogBondFn<F>(pub F);

impl<F: Fn(f64, f64) -> Result<f64>> BondEvaluator for LogBondFn<F> {
    fn log_bond(&self, t: f64, maturity: f64) -> Result<f64> {
        (self.0)(t, maturity)
    }
}
