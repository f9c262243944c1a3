//! Declining discount-rate schedules given as maturity bands.
//!
//! ```json
//! {
//!   "bands": [
//!     { "from": 0, "to": 30, "rate": 0.035 },
//!     { "from": 30, "to": 75, "rate": 0.03 },
//!     { "from": 75, "rate": 0.025 }
//!   ],
//!   "components": { "catastrophe": 0.01 }
//! }
//! ```
//!
//! Bands must start at 0, be contiguous, and end with one open-ended band.
//! `components` is free-form metadata and is not used in any computation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify_curve, CurveClassification};
use crate::error::{Error, Result};
use crate::termstructure::{DiscountCurve, TailModel};

/// Band ends closer than this count as touching.
const CONTIGUITY_TOLERANCE: f64 = 1e-9;

/// Maturities tabulated by default, in years.
pub const DEFAULT_TABLE_MATURITIES: [f64; 14] =
    [1.0, 5.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 125.0, 150.0, 200.0, 300.0, 400.0, 500.0];

/// Probe offsets `(t, x)` use every pair from this list.
pub const CONSISTENCY_PROBES: [f64; 8] = [1.0, 10.0, 30.0, 50.0, 75.0, 100.0, 200.0, 300.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateBand {
    pub from: f64,
    /// End of the band; `None` only for the last, open-ended band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    /// Annual exponential rate.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSchedule {
    pub bands: Vec<RateBand>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
}

/// How a band's rate turns into discount factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandCompounding {
    /// The rate is the instantaneous forward rate inside the band, so `P` is
    /// continuous and piecewise exponential.
    #[default]
    Forward,
    /// `P_{0t} = exp(-r(t) t)` with `r(t)` the rate of the band containing `t`
    /// (band ends inclusive). `P` jumps up at each rate cut.
    Spot,
}

fn at(path: String, message: impl Into<String>) -> Error {
    Error::Json { path, message: message.into() }
}

impl RateSchedule {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let schedule: RateSchedule = serde_path_to_error::deserialize(de)
            .map_err(|e| at(e.path().to_string(), e.into_inner().to_string()))?;
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        RateSchedule::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// A single open band: a flat exponential curve.
    pub fn flat(rate: f64) -> Result<Self> {
        let s = RateSchedule { bands: vec![RateBand { from: 0.0, to: None, rate }], components: BTreeMap::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(at("bands".into(), "at least one band is required"));
        }
        let last = self.bands.len() - 1;
        for (i, b) in self.bands.iter().enumerate() {
            let path = |k: &str| format!("bands[{i}].{k}");
            if !(b.rate.is_finite() && b.rate > 0.0) {
                return Err(at(path("rate"), format!("rate must be finite and positive, got {}", b.rate)));
            }
            if !b.from.is_finite() {
                return Err(at(path("from"), "band start must be finite"));
            }
            if i == 0 && b.from != 0.0 {
                return Err(at(path("from"), format!("the first band must start at 0, got {}", b.from)));
            }
            match b.to {
                None if i < last => {
                    return Err(at(path("to"), "only the last band may be open-ended"));
                }
                Some(_) if i == last => {
                    return Err(at(path("to"), "the last band must be open-ended (omit `to`)"));
                }
                Some(to) if !(to.is_finite() && to > b.from) => {
                    return Err(at(path("to"), format!("band end {to} must exceed its start {}", b.from)));
                }
                Some(to) => {
                    let next = self.bands[i + 1].from;
                    if (next - to).abs() > CONTIGUITY_TOLERANCE {
                        let kind = if next > to { "gap" } else { "overlap" };
                        return Err(at(
                            format!("bands[{}].from", i + 1),
                            format!("{kind} between bands: band {i} ends at {to}, band {} starts at {next}", i + 1),
                        ));
                    }
                }
                None => {}
            }
        }
        Ok(())
    }

    /// Rate of the band containing `t`, band ends inclusive (`t = 30` is in `[0, 30]`).
    pub fn rate_at(&self, t: f64) -> f64 {
        self.bands
            .iter()
            .find(|b| b.to.is_none_or(|to| t <= to))
            .map(|b| b.rate)
            .expect("last band is open-ended")
    }

    /// `-ln P_{0t}`.
    pub fn integrated_rate(&self, t: f64, compounding: BandCompounding) -> f64 {
        match compounding {
            BandCompounding::Spot => self.rate_at(t) * t,
            BandCompounding::Forward => self
                .bands
                .iter()
                .map(|b| {
                    let end = b.to.unwrap_or(f64::INFINITY).min(t);
                    if end > b.from {
                        b.rate * (end - b.from)
                    } else {
                        0.0
                    }
                })
                .sum(),
        }
    }

    /// Curve sampled yearly up to 100 years past the last band start, plus
    /// every band boundary, with an exponential tail at the last band's rate.
    pub fn curve(&self, compounding: BandCompounding) -> Result<DiscountCurve> {
        let last = self.bands.last().expect("validated");
        let horizon = last.from.ceil() + 100.0;
        let mut grid: Vec<f64> = (1..=horizon as usize).map(|k| k as f64).collect();
        grid.extend(self.bands.iter().skip(1).map(|b| b.from));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let values: Vec<f64> = grid.iter().map(|&t| (-self.integrated_rate(t, compounding)).exp()).collect();
        DiscountCurve::new(grid, values)?.with_tail(TailModel::Exponential { rate: last.rate })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub maturity: f64,
    pub discount_factor: f64,
    /// `-ln P_{0T} / T`.
    pub implied_exponential_rate: f64,
    /// Band rate at `T`.
    pub band_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleReport {
    pub compounding: BandCompounding,
    pub rows: Vec<ScheduleRow>,
    pub classification: CurveClassification,
    /// Largest `|P(t + x) - P(t) P(x)|` over the probe pairs; zero for a time-consistent curve.
    pub time_consistency_residual: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
}

pub fn schedule_report(schedule: &RateSchedule, compounding: BandCompounding, maturities: &[f64]) -> Result<ScheduleReport> {
    schedule.validate()?;
    let curve = schedule.curve(compounding)?;
    let rows = maturities
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::invalid(format!("table maturities must be positive, got {t}")));
            }
            let df = curve.discount(t)?;
            Ok(ScheduleRow {
                maturity: t,
                discount_factor: df,
                implied_exponential_rate: -df.ln() / t,
                band_rate: schedule.rate_at(t),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let probes: Vec<(f64, f64)> =
        CONSISTENCY_PROBES.iter().flat_map(|&t| CONSISTENCY_PROBES.iter().map(move |&x| (t, x))).collect();
    Ok(ScheduleReport {
        compounding,
        rows,
        classification: classify_curve(&curve),
        time_consistency_residual: curve.time_consistency_residual(&probes)?,
        components: schedule.components.clone(),
    })
}
