//! Sampled initial discount functions `P_{0t}`.
//!
//! Values are stored as `ln P` and interpolated linearly, which keeps every
//! interpolated discount factor positive and makes the instantaneous forward
//! rate piecewise constant. Past the last grid point the curve is only defined
//! when an explicit [`TailModel`] is attached.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::BondEvaluator;
use crate::error::{Error, Result};

/// Asymptotic continuation of a curve beyond its last grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    /// Constant instantaneous forward rate.
    Exponential { rate: f64 },
    /// Forward ratio of a tail-Pareto discount function `(1 + L T / λ)^(-λ)`.
    TailPareto { index: f64, rate: f64 },
}

impl TailModel {
    fn validate(&self) -> Result<()> {
        match *self {
            TailModel::Exponential { rate } if !rate.is_finite() => {
                Err(Error::invalid(format!("exponential tail rate must be finite, got {rate}")))
            }
            TailModel::TailPareto { index, rate } if !(index.is_finite() && index > 0.0) => Err(Error::invalid(
                format!("tail-Pareto index must be finite and positive, got {index} (rate {rate})"),
            )),
            TailModel::TailPareto { rate, .. } if !(rate.is_finite() && rate > 0.0) => {
                Err(Error::invalid(format!("tail-Pareto rate must be finite and positive, got {rate}")))
            }
            _ => Ok(()),
        }
    }

    /// `ln P(T) - ln P(T_n)` for `T >= T_n`.
    fn log_increment(&self, from: f64, to: f64) -> f64 {
        match *self {
            TailModel::Exponential { rate } => -rate * (to - from),
            TailModel::TailPareto { index, rate } => {
                -index * ((rate * to / index).ln_1p() - (rate * from / index).ln_1p())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountCurve {
    grid: Vec<f64>,
    log_values: Vec<f64>,
    tail: Option<TailModel>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    maturity_years: f64,
    discount_factor: f64,
}

impl DiscountCurve {
    /// Builds a curve from maturities and discount factors. A leading `(0, 1)`
    /// point is prepended when the grid does not start at zero.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::invalid(format!(
                "grid has {} points but {} discount factors were given",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(Error::invalid("curve needs at least one maturity beyond 0"));
        }
        let mut g = Vec::with_capacity(grid.len() + 1);
        let mut lv = Vec::with_capacity(grid.len() + 1);
        if grid[0] != 0.0 {
            g.push(0.0);
            lv.push(0.0);
        }
        for (i, (&t, &p)) in grid.iter().zip(&values).enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::invalid(format!("maturity #{i} must be finite and nonnegative, got {t}")));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::invalid(format!(
                    "discount factor #{i} at maturity {t} must be positive and finite, got {p}"
                )));
            }
            if t == 0.0 && (p - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("discount factor at maturity 0 must be 1, got {p}")));
            }
            if let Some(&prev) = g.last() {
                if t <= prev {
                    return Err(Error::invalid(format!(
                        "maturities must be strictly increasing: {t} follows {prev}"
                    )));
                }
            }
            g.push(t);
            lv.push(if t == 0.0 { 0.0 } else { p.ln() });
        }
        if g.len() < 2 {
            return Err(Error::invalid("curve needs at least one maturity beyond 0"));
        }
        Ok(DiscountCurve { grid: g, log_values: lv, tail: None })
    }

    /// Samples `f` on `grid` (maturity 0 is added when missing).
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&t| if t == 0.0 { 1.0 } else { f(t) }).collect();
        DiscountCurve::new(grid.to_vec(), values)
    }

    /// `exp(-r t)` sampled on `0, 1, ..., horizon` years, with an exponential tail.
    pub fn flat_exponential(rate: f64, horizon: f64) -> Result<Self> {
        let grid = unit_grid(horizon)?;
        DiscountCurve::from_fn(&grid, |t| (-rate * t).exp())?.with_tail(TailModel::Exponential { rate })
    }

    /// `(1 + L t / λ)^(-λ)` sampled on `0, 1, ..., horizon` years, with the matching tail.
    pub fn tail_pareto(index: f64, rate: f64, horizon: f64) -> Result<Self> {
        let tail = TailModel::TailPareto { index, rate };
        tail.validate()?;
        let grid = unit_grid(horizon)?;
        DiscountCurve::from_fn(&grid, |t| (-index * (rate * t / index).ln_1p()).exp())?.with_tail(tail)
    }

    pub fn with_tail(mut self, tail: TailModel) -> Result<Self> {
        tail.validate()?;
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn without_tail(mut self) -> Self {
        self.tail = None;
        self
    }

    pub fn tail(&self) -> Option<TailModel> {
        self.tail
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn discount_factors(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }

    /// Last grid maturity.
    pub fn last_maturity(&self) -> f64 {
        *self.grid.last().expect("curve grid is never empty")
    }

    /// Largest maturity the curve can evaluate.
    pub fn horizon(&self) -> f64 {
        if self.tail.is_some() {
            f64::INFINITY
        } else {
            self.last_maturity()
        }
    }

    pub fn log_discount(&self, maturity: f64) -> Result<f64> {
        if !(maturity >= 0.0) {
            return Err(Error::invalid(format!("maturity must be nonnegative, got {maturity}")));
        }
        let last = self.last_maturity();
        if maturity > last {
            return match self.tail {
                Some(tail) if maturity.is_finite() => {
                    Ok(self.log_values[self.grid.len() - 1] + tail.log_increment(last, maturity))
                }
                Some(_) => Err(Error::invalid("maturity must be finite")),
                None => Err(Error::OutOfHorizon { requested: maturity, horizon: last }),
            };
        }
        let j = self.grid.partition_point(|&g| g <= maturity);
        if j == self.grid.len() {
            return Ok(self.log_values[j - 1]);
        }
        let (t0, t1) = (self.grid[j - 1], self.grid[j]);
        let (y0, y1) = (self.log_values[j - 1], self.log_values[j]);
        if maturity == t0 {
            return Ok(y0);
        }
        let w = (maturity - t0) / (t1 - t0);
        Ok(y0 + w * (y1 - y0))
    }

    pub fn discount(&self, maturity: f64) -> Result<f64> {
        self.log_discount(maturity).map(f64::exp)
    }

    /// `P_{tT} = P_{0T} / P_{0t}`.
    pub fn forward_discount(&self, t: f64, maturity: f64) -> Result<f64> {
        self.log_bond(t, maturity).map(f64::exp)
    }

    /// Long rate implied by an attached tail model: the exponential rate, or
    /// `L^(λ)_{0∞} = L (P(T_n) (1 + L T_n / λ)^λ)^(-1/λ)` for a tail-Pareto tail.
    pub fn tail_long_rate(&self) -> Option<f64> {
        let last = self.last_maturity();
        let ln_pn = *self.log_values.last().expect("curve grid is never empty");
        self.tail.map(|tail| match tail {
            TailModel::Exponential { rate } => rate,
            TailModel::TailPareto { index, rate } => {
                let ln_c = ln_pn + index * (rate * last / index).ln_1p();
                rate * (-ln_c / index).exp()
            }
        })
    }

    /// Maximum of `|f(t + x) - f(t) f(x)|` over the probes, `f(u) = P_{0u}`.
    /// Zero exactly when `f` satisfies the Cauchy equation on the probed set,
    /// i.e. the curve is time consistent there.
    pub fn time_consistency_residual(&self, probes: &[(f64, f64)]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &(t, x) in probes {
            if !(t >= 0.0 && x >= 0.0) {
                return Err(Error::invalid(format!("probe ({t}, {x}) must have t, x >= 0")));
            }
            let lhs = self.discount(t + x)?;
            let rhs = self.discount(t)? * self.discount(x)?;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["maturity_years", "discount_factor"] {
            return Err(Error::invalid(format!(
                "curve CSV header must be 'maturity_years,discount_factor', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            grid.push(row.maturity_years);
            values.push(row.discount_factor);
        }
        DiscountCurve::new(grid, values)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        DiscountCurve::from_csv_reader(file)
    }

    /// Writes grid points using `format_value` for both columns.
    pub fn write_csv<W: Write>(&self, writer: W, format_value: impl Fn(f64) -> String) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["maturity_years", "discount_factor"])?;
        for (t, y) in self.grid.iter().zip(&self.log_values) {
            w.write_record([format_value(*t), format_value(y.exp())])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl BondEvaluator for DiscountCurve {
    fn log_bond(&self, t: f64, maturity: f64) -> Result<f64> {
        if !(t >= 0.0 && maturity >= t) {
            return Err(Error::invalid(format!("need 0 <= t <= T, got t={t}, T={maturity}")));
        }
        Ok(self.log_discount(maturity)? - self.log_discount(t)?)
    }
}

fn unit_grid(horizon: f64) -> Result<Vec<f64>> {
    if !(horizon.is_finite() && horizon >= 1.0) {
        return Err(Error::invalid(format!("curve horizon must be at least 1 year, got {horizon}")));
    }
    let n = horizon.ceil() as usize;
    Ok((0..=n).map(|i| i as f64).collect())
}
