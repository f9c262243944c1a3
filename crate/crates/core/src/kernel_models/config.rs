//! JSON model configuration.
//!
//! ```json
//! {
//!   "factors": 1,
//!   "lambda": 1,
//!   "coefficients": {
//!     "a": { "family": "rational", "params": { "scale": 0.5, "shift": 1, "power": 1 }, "tail_limit": 0.5 },
//!     "b": { "family": "rational", "params": { "scale": 0.5, "shift": 2, "power": 1 } }
//!   },
//!   "drivers": { "M": { "type": "gbm", "sigma": [{ "from": 0, "sigma": 0.2 }] } }
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::{CoefficientFunction, OneFactorModel, RationalModel, TwoFactorModel};
use crate::error::{Error, Result};
use crate::montecarlo::MartingaleDriver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    /// `scale / (shift + t)^power`
    Rational,
    /// `scale exp(-decay t) / (shift + t)^power`
    ExpRational,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub family: FamilySpec,
    pub params: CoefficientParams,
    /// Declared `lim t^λ f(t)`; checked against the family's exact limit when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CoefficientSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drivers {
    #[serde(rename = "M")]
    pub m: MartingaleDriver,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<MartingaleDriver>,
}

/// Simulation settings bundled with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub factors: u8,
    pub lambda: f64,
    pub coefficients: Coefficients,
    pub drivers: Drivers,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSpec>,
}

fn at(path: &str, e: Error) -> Error {
    let message = match e {
        Error::InvalidInput(m) => m,
        other => other.to_string(),
    };
    Error::Json { path: path.to_string(), message }
}

fn require(path: &str, name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Json { path: format!("{path}.params"), message: format!("missing field `{name}`") })
}

impl CoefficientSpec {
    pub fn build(&self, index: f64, path: &str) -> Result<CoefficientFunction> {
        let p = &self.params;
        let scale = require(path, "scale", p.scale)?;
        let shift = require(path, "shift", p.shift)?;
        let power = require(path, "power", p.power)?;
        let f = match self.family {
            FamilySpec::Rational => {
                if p.decay.is_some() {
                    return Err(Error::Json {
                        path: format!("{path}.params.decay"),
                        message: "the rational family takes no decay".into(),
                    });
                }
                CoefficientFunction::rational(scale, shift, power, index)
            }
            FamilySpec::ExpRational => {
                let decay = require(path, "decay", p.decay)?;
                CoefficientFunction::exp_rational(scale, decay, shift, power, index)
            }
        }
        .map_err(|e| at(path, e))?;
        if let Some(declared) = self.tail_limit {
            let exact = f.tail_limit();
            if (declared - exact).abs() > 1e-9 * exact.abs().max(1.0) {
                return Err(Error::Json {
                    path: format!("{path}.tail_limit"),
                    message: format!("declared tail limit {declared} but the family's limit is {exact}"),
                });
            }
        }
        Ok(f)
    }
}

impl ModelConfig {
    /// Parses JSON, reporting the key path of the first offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Json { path, message: e.into_inner().to_string() }
        })
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        ModelConfig::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<RationalModel> {
        let lambda = self.lambda;
        let a = self.coefficients.a.build(lambda, "coefficients.a")?;
        let b = self.coefficients.b.build(lambda, "coefficients.b")?;
        match self.factors {
            1 => {
                if self.coefficients.c.is_some() {
                    return Err(Error::Json { path: "coefficients.c".into(), message: "one-factor model takes no c".into() });
                }
                if self.drivers.n.is_some() {
                    return Err(Error::Json { path: "drivers.N".into(), message: "one-factor model takes no N driver".into() });
                }
                let model = OneFactorModel::new(a, b, self.drivers.m.clone()).map_err(|e| at("coefficients", e))?;
                Ok(model.into())
            }
            2 => {
                if (lambda - 1.0).abs() > 1e-12 {
                    return Err(Error::Json { path: "lambda".into(), message: "two-factor models require lambda = 1".into() });
                }
                let c_spec = self
                    .coefficients
                    .c
                    .as_ref()
                    .ok_or_else(|| Error::Json { path: "coefficients".into(), message: "missing field `c`".into() })?;
                let c = c_spec.build(lambda, "coefficients.c")?;
                let n = self
                    .drivers
                    .n
                    .clone()
                    .ok_or_else(|| Error::Json { path: "drivers".into(), message: "missing field `N`".into() })?;
                let model = TwoFactorModel::new(a, b, c, self.drivers.m.clone(), n, self.correlation.unwrap_or(0.0))
                    .map_err(|e| at("coefficients", e))?;
                Ok(model.into())
            }
            k => Err(Error::Json { path: "factors".into(), message: format!("factors must be 1 or 2, got {k}") }),
        }
    }
}
