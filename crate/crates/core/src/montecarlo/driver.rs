use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a volatility schedule: `σ` applies from `from` until the next piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolatilityPiece {
    pub from: f64,
    pub sigma: f64,
}

/// Geometric Brownian motion `dM = σ(t) M dW`, `M_0 = 1`, with piecewise-constant `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DriverSpec", into = "DriverSpec")]
pub struct MartingaleDriver {
    schedule: Vec<VolatilityPiece>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverSpec {
    #[serde(rename = "type")]
    kind: String,
    sigma: Vec<VolatilityPiece>,
}

impl TryFrom<DriverSpec> for MartingaleDriver {
    type Error = Error;
    fn try_from(spec: DriverSpec) -> Result<Self> {
        if spec.kind != "gbm" {
            return Err(Error::invalid(format!("unsupported driver type '{}' (only 'gbm')", spec.kind)));
        }
        MartingaleDriver::piecewise(spec.sigma)
    }
}

impl From<MartingaleDriver> for DriverSpec {
    fn from(d: MartingaleDriver) -> Self {
        DriverSpec { kind: "gbm".into(), sigma: d.schedule }
    }
}

impl MartingaleDriver {
    pub fn constant(sigma: f64) -> Result<Self> {
        MartingaleDriver::piecewise(vec![VolatilityPiece { from: 0.0, sigma }])
    }

    pub fn piecewise(schedule: Vec<VolatilityPiece>) -> Result<Self> {
        let first = schedule.first().ok_or_else(|| Error::invalid("volatility schedule is empty"))?;
        if first.from != 0.0 {
            return Err(Error::invalid(format!("volatility schedule must start at 0, starts at {}", first.from)));
        }
        for (i, p) in schedule.iter().enumerate() {
            if !(p.sigma.is_finite() && p.sigma >= 0.0) {
                return Err(Error::invalid(format!("volatility #{i} must be finite and nonnegative, got {}", p.sigma)));
            }
            if !p.from.is_finite() || (i > 0 && p.from <= schedule[i - 1].from) {
                return Err(Error::invalid(format!("volatility schedule times must increase, got {} at #{i}", p.from)));
            }
        }
        Ok(MartingaleDriver { schedule })
    }

    pub fn schedule(&self) -> &[VolatilityPiece] {
        &self.schedule
    }

    pub fn sigma_at(&self, t: f64) -> f64 {
        let j = self.schedule.partition_point(|p| p.from <= t);
        self.schedule[j.max(1) - 1].sigma
    }

    /// `∫_s^t σ(u)^2 du`.
    pub fn integrated_variance(&self, s: f64, t: f64) -> f64 {
        if t <= s {
            return 0.0;
        }
        let mut total = 0.0;
        for (i, p) in self.schedule.iter().enumerate() {
            let end = self.schedule.get(i + 1).map_or(f64::INFINITY, |q| q.from);
            let lo = p.from.max(s);
            let hi = end.min(t);
            if hi > lo && p.sigma > 0.0 {
                total += p.sigma * p.sigma * (hi - lo);
            }
        }
        total
    }

    /// `∫_s^t σ_1(u) σ_2(u) du`.
    pub fn integrated_covariance(&self, other: &MartingaleDriver, s: f64, t: f64) -> f64 {
        if t <= s {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .schedule
            .iter()
            .chain(&other.schedule)
            .map(|p| p.from)
            .filter(|&c| c > s && c < t)
            .collect();
        cuts.push(s);
        cuts.push(t);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| self.sigma_at(w[0]) * other.sigma_at(w[0]) * (w[1] - w[0]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrated_variance_piecewise() {
        let d = MartingaleDriver::piecewise(vec![
            VolatilityPiece { from: 0.0, sigma: 0.2 },
            VolatilityPiece { from: 5.0, sigma: 0.1 },
            VolatilityPiece { from: 20.0, sigma: 0.0 },
        ])
        .unwrap();
        assert!((d.integrated_variance(0.0, 1.0) - 0.04).abs() < 1e-15);
        let v = 0.04 * 5.0 + 0.01 * 15.0;
        assert!((d.integrated_variance(0.0, 1e6) - v).abs() < 1e-14);
        assert!((d.integrated_variance(4.0, 6.0) - 0.05).abs() < 1e-15);
        assert_eq!(d.sigma_at(25.0), 0.0);
        let c = MartingaleDriver::constant(0.3).unwrap();
        assert!((d.integrated_covariance(&c, 4.0, 6.0) - (0.06 + 0.03)).abs() < 1e-15);
    }

    #[test]
    fn json_form() {
        let d: MartingaleDriver =
            serde_json::from_str(r#"{"type":"gbm","sigma":[{"from":0,"sigma":0.2}]}"#).unwrap();
        assert_eq!(d, MartingaleDriver::constant(0.2).unwrap());
        assert!(serde_json::from_str::<MartingaleDriver>(r#"{"type":"levy","sigma":[{"from":0,"sigma":0.2}]}"#).is_err());
        assert!(MartingaleDriver::constant(-0.1).is_err());
    }
}
