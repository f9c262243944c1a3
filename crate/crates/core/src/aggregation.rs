//! Discount functions of a population of exponential discounters.
//!
//! If individual rates are distributed as `R ~ μ`, the aggregate discount
//! function is the Laplace transform `P_{0t} = E[exp(-R t)]`. Equivalently,
//! with `Z ~ Exp(1)` independent of `R`, the "calamity time" `τ = Z / R`
//! satisfies `P(τ > t) = P_{0t}`, which [`sample_calamity_time`] exploits.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SampleStats;
use crate::report::ConvergenceStatus;

/// Default censoring cap for calamity times, in years.
pub const DEFAULT_CENSOR_CAP: f64 = 1e4;

/// Successive estimates closer than this are declared converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

const SAMPLE_CHUNK: usize = 4096;

/// Distribution of individual exponential discount rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateMixture {
    /// Finitely many rates `r_i >= 0` with weights `p_i` summing to one.
    Discrete { weights: Vec<f64>, rates: Vec<f64> },
    /// Exponentially distributed rate with mean `L`.
    Exponential { mean_rate: f64 },
    /// Gamma distributed rate with shape `λ` and mean `L` (rate parameter `λ / L`).
    Gamma { shape: f64, mean_rate: f64 },
}

impl RateMixture {
    pub fn discrete(weights: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        let m = RateMixture::Discrete { weights, rates };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(mean_rate: f64) -> Result<Self> {
        let m = RateMixture::Exponential { mean_rate };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(shape: f64, mean_rate: f64) -> Result<Self> {
        let m = RateMixture::Gamma { shape, mean_rate };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite and positive, got {v}")))
            }
        };
        match self {
            RateMixture::Discrete { weights, rates } => {
                if weights.is_empty() || weights.len() != rates.len() {
                    return Err(Error::invalid(format!(
                        "discrete mixture needs equally many weights and rates, got {} and {}",
                        weights.len(),
                        rates.len()
                    )));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                    return Err(Error::invalid(format!("mixture weights must be nonnegative, got {w}")));
                }
                if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                    return Err(Error::invalid(format!("mixture rates must be nonnegative, got {r}")));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid(format!("mixture weights must sum to 1, got {total}")));
                }
                Ok(())
            }
            RateMixture::Exponential { mean_rate } => positive("mean rate", *mean_rate),
            RateMixture::Gamma { shape, mean_rate } => {
                positive("gamma shape", *shape)?;
                positive("mean rate", *mean_rate)
            }
        }
    }

    /// `ln E[exp(-R t)]`.
    pub fn log_discount(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::invalid(format!("time must be finite and nonnegative, got {t}")));
        }
        Ok(match self {
            RateMixture::Discrete { weights, rates } => {
                let terms: Vec<f64> = weights
                    .iter()
                    .zip(rates)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, r)| w.ln() - r * t)
                    .collect();
                let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
            }
            RateMixture::Exponential { mean_rate } => -(mean_rate * t).ln_1p(),
            RateMixture::Gamma { shape, mean_rate } => -shape * (mean_rate * t / shape).ln_1p(),
        })
    }

    /// The limit of `-(1/t) ln P_{0t}`: the smallest atom for a discrete
    /// mixture, zero when the rate distribution has mass near zero.
    pub fn asymptotic_target(&self) -> f64 {
        match self {
            RateMixture::Discrete { weights, rates } => weights
                .iter()
                .zip(rates)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, r)| *r)
                .fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }
}

/// `P_{0t} = E[exp(-R t)]` for the mixture.
pub fn aggregate_discount(mix: &RateMixture, t: f64) -> Result<f64> {
    mix.log_discount(t).map(f64::exp)
}

/// `{10, 100, ..., 10^6}` years.
pub fn default_horizon_schedule() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRateEstimate {
    /// `(t, -(1/t) ln P_{0t})` along the schedule.
    pub trace: Vec<(f64, f64)>,
    pub value: f64,
    pub target: f64,
    pub status: ConvergenceStatus,
}

/// Evaluates `-(1/t) ln P_{0t}` along an increasing schedule; converged when
/// the last two estimates differ by less than [`CONVERGENCE_TOLERANCE`].
pub fn asymptotic_exponential_rate(mix: &RateMixture, schedule: &[f64]) -> Result<AsymptoticRateEstimate> {
    if schedule.len() < 2 {
        return Err(Error::invalid("horizon schedule needs at least two times"));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] <= 0.0 {
        return Err(Error::invalid("horizon schedule must be positive and strictly increasing"));
    }
    let trace = schedule
        .iter()
        .map(|&t| mix.log_discount(t).map(|y| (t, -y / t)))
        .collect::<Result<Vec<_>>>()?;
    let n = trace.len();
    let value = trace[n - 1].1;
    let status = if (value - trace[n - 2].1).abs() < CONVERGENCE_TOLERANCE {
        ConvergenceStatus::Converged
    } else {
        ConvergenceStatus::Unconverged
    };
    Ok(AsymptoticRateEstimate { trace, value, target: mix.asymptotic_target(), status })
}

/// Draws of `τ = Z / R`, censored at `cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalamitySample {
    /// `min(τ, cap)` for each draw, in draw order.
    pub times: Vec<f64>,
    pub cap: f64,
    pub censored: usize,
}

impl CalamitySample {
    /// Empirical `P(τ > t)` with its standard error; only meaningful for `t < cap`.
    pub fn survival(&self, t: f64) -> SampleStats {
        let ind: Vec<f64> = self.times.iter().map(|&x| if x > t { 1.0 } else { 0.0 }).collect();
        SampleStats::from_slice(&ind)
    }

    /// Single-column CSV with header `tau`.
    pub fn write_csv<W: Write>(&self, writer: W, format_value: impl Fn(f64) -> String) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record(["tau"])?;
        for &t in &self.times {
            w.write_record([format_value(t)])?;
        }
        w.flush()?;
        Ok(())
    }
}

enum RateSampler {
    Discrete(WeightedIndex<f64>, Vec<f64>),
    Exponential(Exp<f64>),
    Gamma(Gamma<f64>),
}

impl RateSampler {
    fn new(mix: &RateMixture) -> Result<Self> {
        let bad = |e: &dyn std::fmt::Display| Error::invalid(format!("cannot sample mixture: {e}"));
        Ok(match mix {
            RateMixture::Discrete { weights, rates } => {
                RateSampler::Discrete(WeightedIndex::new(weights).map_err(|e| bad(&e))?, rates.clone())
            }
            RateMixture::Exponential { mean_rate } => {
                RateSampler::Exponential(Exp::new(1.0 / mean_rate).map_err(|e| bad(&e))?)
            }
            RateMixture::Gamma { shape, mean_rate } => {
                RateSampler::Gamma(Gamma::new(*shape, mean_rate / shape).map_err(|e| bad(&e))?)
            }
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            RateSampler::Discrete(idx, rates) => rates[idx.sample(rng)],
            RateSampler::Exponential(d) => d.sample(rng),
            RateSampler::Gamma(d) => d.sample(rng),
        }
    }
}

/// Samples `count` calamity times. Draws are generated in fixed-size chunks,
/// each on its own stream of a ChaCha generator keyed by `seed`, so the output
/// does not depend on the number of worker threads.
pub fn sample_calamity_time(mix: &RateMixture, count: usize, seed: u64, cap: f64) -> Result<CalamitySample> {
    mix.validate()?;
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::invalid(format!("censoring cap must be finite and positive, got {cap}")));
    }
    let sampler = RateSampler::new(mix)?;
    let mut times = vec![0.0; count];
    times.par_chunks_mut(SAMPLE_CHUNK).enumerate().for_each(|(chunk, out)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        for slot in out.iter_mut() {
            let r = sampler.draw(&mut rng);
            let z: f64 = Exp1.sample(&mut rng);
            let tau = if r > 0.0 { z / r } else { f64::INFINITY };
            *slot = tau.min(cap);
        }
    });
    let censored = times.iter().filter(|&&t| t >= cap).count();
    Ok(CalamitySample { times, cap, censored })
}
