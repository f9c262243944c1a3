//! Rate conventions and the algebra connecting them to discount factors.
//!
//! Every conversion goes through the log discount factor `ln P = -y`, with the
//! tail-Pareto and zero-coupon maps written in terms of `ln_1p`/`exp_m1` so that
//! small tenors, small rates and very large indices keep full precision.
//!
//! | convention       | discount factor                       |
//! |------------------|---------------------------------------|
//! | exponential `R`  | `exp(-x R)`                           |
//! | Libor `L`        | `1 / (1 + x L)`                       |
//! | tail-Pareto `L`  | `(1 + x L / λ)^(-λ)`                  |
//! | zero-coupon `Z`  | `(1 + Z / κ)^(-κ x)`                  |
//!
//! with `x = T - t`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::Verdict;

/// A pair of times `0 <= t < T` in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tenor {
    start: f64,
    end: f64,
}

impl Tenor {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::invalid(format!("tenor times must be finite, got ({start}, {end})")));
        }
        if start < 0.0 {
            return Err(Error::invalid(format!("tenor start must be nonnegative, got {start}")));
        }
        if end - start <= 0.0 {
            return Err(Error::invalid(format!("tenor requires T > t, got t={start}, T={end}")));
        }
        Ok(Tenor { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Time to maturity `T - t`.
    pub fn span(&self) -> f64 {
        self.end - self.start
    }
}

/// One of the four quotation systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RateConvention {
    Exponential,
    Libor,
    /// Tail-Pareto rate with index λ.
    TailPareto(f64),
    /// Zero-coupon rate with compounding frequency κ.
    ZeroCoupon(f64),
}

impl RateConvention {
    pub fn tail_pareto(index: f64) -> Result<Self> {
        let c = RateConvention::TailPareto(index);
        c.validate()?;
        Ok(c)
    }

    pub fn zero_coupon(frequency: f64) -> Result<Self> {
        let c = RateConvention::ZeroCoupon(frequency);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RateConvention::TailPareto(v) | RateConvention::ZeroCoupon(v) if !(v.is_finite() && v > 0.0) => {
                Err(Error::invalid(format!("convention index must be a finite positive real, got {v}")))
            }
            _ => Ok(()),
        }
    }

    /// Tail index for the hyperbolic family (Libor is index 1).
    pub fn pareto_index(&self) -> Option<f64> {
        match *self {
            RateConvention::Libor => Some(1.0),
            RateConvention::TailPareto(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for RateConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateConvention::Exponential => f.write_str("exp"),
            RateConvention::Libor => f.write_str("libor"),
            RateConvention::TailPareto(l) => write!(f, "pareto:{l}"),
            RateConvention::ZeroCoupon(k) => write!(f, "zc:{k}"),
        }
    }
}

impl FromStr for RateConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_index = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad convention index '{v}' in '{s}'")))
        };
        match s.split_once(':') {
            None => match s {
                "exp" | "exponential" => Ok(RateConvention::Exponential),
                "libor" | "simple" => Ok(RateConvention::Libor),
                _ => Err(Error::invalid(format!(
                    "unknown convention '{s}' (expected exp|libor|pareto:<index>|zc:<frequency>)"
                ))),
            },
            Some(("pareto", v)) => RateConvention::tail_pareto(parse_index(v)?),
            Some(("zc", v)) => RateConvention::zero_coupon(parse_index(v)?),
            Some(_) => Err(Error::invalid(format!(
                "unknown convention '{s}' (expected exp|libor|pareto:<index>|zc:<frequency>)"
            ))),
        }
    }
}

impl TryFrom<String> for RateConvention {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RateConvention> for String {
    fn from(c: RateConvention) -> String {
        c.to_string()
    }
}

/// A quoted rate on a tenor under a convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQuote {
    pub tenor: Tenor,
    pub convention: RateConvention,
    pub value: f64,
}

impl RateQuote {
    pub fn new(tenor: Tenor, convention: RateConvention, value: f64) -> Result<Self> {
        log_discount_from_rate(tenor, convention, value)?;
        Ok(RateQuote { tenor, convention, value })
    }

    pub fn discount_factor(&self) -> Result<f64> {
        discount_from_rate(self.tenor, self.convention, self.value)
    }

    pub fn to_convention(&self, to: RateConvention) -> Result<RateQuote> {
        let value = convert_rate(self.tenor, self.convention, to, self.value)?;
        Ok(RateQuote { tenor: self.tenor, convention: to, value })
    }
}

fn domain(conv: RateConvention, message: String) -> Error {
    Error::Domain { convention: conv.to_string(), message }
}

fn hyperbolic_log_discount(conv: RateConvention, span: f64, rate: f64, index: f64) -> Result<f64> {
    let u = span * rate / index;
    if u <= -1.0 {
        return Err(domain(
            conv,
            format!("rate {rate} must exceed -index/(T-t) = {}", -index / span),
        ));
    }
    Ok(-index * u.ln_1p())
}

/// `ln P_{tT}` implied by a quoted rate.
pub fn log_discount_from_rate(tenor: Tenor, conv: RateConvention, rate: f64) -> Result<f64> {
    conv.validate()?;
    if !rate.is_finite() {
        return Err(domain(conv, format!("rate must be finite, got {rate}")));
    }
    let span = tenor.span();
    match conv {
        RateConvention::Exponential => Ok(-span * rate),
        RateConvention::Libor => hyperbolic_log_discount(conv, span, rate, 1.0),
        RateConvention::TailPareto(index) => hyperbolic_log_discount(conv, span, rate, index),
        RateConvention::ZeroCoupon(freq) => {
            let u = rate / freq;
            if u <= -1.0 {
                return Err(domain(conv, format!("rate {rate} must exceed -frequency = {}", -freq)));
            }
            Ok(-freq * span * u.ln_1p())
        }
    }
}

/// Discount factor `P_{tT}` implied by a quoted rate.
pub fn discount_from_rate(tenor: Tenor, conv: RateConvention, rate: f64) -> Result<f64> {
    let ln_df = log_discount_from_rate(tenor, conv, rate)?;
    let df = ln_df.exp();
    if !(df > 0.0 && df.is_finite()) {
        return Err(domain(conv, format!("implied discount factor exp({ln_df}) is not representable")));
    }
    Ok(df)
}

/// Rate implied by a log discount factor. `ln_df = -inf` maps to an infinite rate.
pub fn rate_from_log_discount(tenor: Tenor, conv: RateConvention, ln_df: f64) -> Result<f64> {
    conv.validate()?;
    if ln_df.is_nan() || ln_df == f64::INFINITY {
        return Err(Error::invalid(format!("log discount factor must be < +inf, got {ln_df}")));
    }
    let span = tenor.span();
    let y = -ln_df;
    Ok(match conv {
        RateConvention::Exponential => y / span,
        RateConvention::Libor => y.exp_m1() / span,
        RateConvention::TailPareto(index) => index * (y / index).exp_m1() / span,
        RateConvention::ZeroCoupon(freq) => freq * (y / (freq * span)).exp_m1(),
    })
}

/// Rate implied by a discount factor.
pub fn rate_from_discount(tenor: Tenor, conv: RateConvention, df: f64) -> Result<f64> {
    if !(df > 0.0 && df.is_finite()) {
        return Err(Error::invalid(format!("discount factor must be positive and finite, got {df}")));
    }
    rate_from_log_discount(tenor, conv, df.ln())
}

/// Re-quote a rate in another convention on the same tenor.
pub fn convert_rate(tenor: Tenor, from: RateConvention, to: RateConvention, value: f64) -> Result<f64> {
    to.validate()?;
    let ln_df = log_discount_from_rate(tenor, from, value)?;
    if from == to {
        return Ok(value);
    }
    rate_from_log_discount(tenor, to, ln_df)
}

/// Exponential rate equivalent to a zero-coupon rate; tenor independent.
pub fn exponential_from_zero_coupon(z: f64, frequency: f64) -> Result<f64> {
    RateConvention::zero_coupon(frequency)?;
    if z / frequency <= -1.0 {
        return Err(domain(RateConvention::ZeroCoupon(frequency), format!("rate {z} must exceed {}", -frequency)));
    }
    Ok(frequency * (z / frequency).ln_1p())
}

/// Zero-coupon rate equivalent to an exponential rate; tenor independent.
pub fn zero_coupon_from_exponential(r: f64, frequency: f64) -> Result<f64> {
    RateConvention::zero_coupon(frequency)?;
    Ok(frequency * (r / frequency).exp_m1())
}

/// Rates of one discount factor under the exponential and several tail-Pareto
/// conventions, with a verdict on their ordering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub tenor: Tenor,
    pub discount_factor: f64,
    pub exponential: f64,
    /// `(index, rate)` sorted by decreasing index; always includes Libor (index 1).
    pub pareto: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

/// Checks `R <= L^(α) <= L^(β)` for every `α > β` among `alphas ∪ {1}`.
pub fn ordering_audit(tenor: Tenor, df: f64, alphas: &[f64]) -> Result<OrderingReport> {
    if alphas.is_empty() {
        return Err(Error::invalid("ordering audit needs at least one index"));
    }
    let mut indices: Vec<f64> = Vec::with_capacity(alphas.len() + 1);
    for &a in alphas {
        RateConvention::tail_pareto(a)?;
        indices.push(a);
    }
    if !indices.contains(&1.0) {
        indices.push(1.0);
    }
    indices.sort_by(|a, b| b.total_cmp(a));
    indices.dedup();

    let exponential = rate_from_discount(tenor, RateConvention::Exponential, df)?;
    let pareto = indices
        .iter()
        .map(|&l| rate_from_discount(tenor, RateConvention::TailPareto(l), df).map(|r| (l, r)))
        .collect::<Result<Vec<_>>>()?;

    let mut chain = Vec::with_capacity(pareto.len() + 1);
    chain.push(exponential);
    chain.extend(pareto.iter().map(|&(_, r)| r));
    let ordered = chain.windows(2).all(|w| {
        let tol = 1e-12 * w[0].abs().max(w[1].abs());
        w[0] <= w[1] + tol
    });

    Ok(OrderingReport {
        tenor,
        discount_factor: df,
        exponential,
        pareto,
        verdict: Verdict::from_bool(ordered),
    })
}
