//! Bundled example models and curves.

use crate::error::{Error, Result};
use crate::kernel_models::{ModelConfig, RationalModel};
use crate::termstructure::DiscountCurve;

const MODELS: [(&str, &str); 7] = [
    ("ref1f", include_str!("../models/ref1f.json")),
    ("ref2f", include_str!("../models/ref2f.json")),
    ("ref2f-fgh", include_str!("../models/ref2f-fgh.json")),
    ("pareto05", include_str!("../models/pareto05.json")),
    ("pareto2", include_str!("../models/pareto2.json")),
    ("pareto3", include_str!("../models/pareto3.json")),
    ("exprational", include_str!("../models/exprational.json")),
];

/// Names of the bundled curves: a flat 3% exponential curve, a hyperbolic
/// curve `1/(1 + 0.02 T)`, and the index-3 curve `(1 + 0.02 T / 3)^(-3)`.
pub const CURVE_NAMES: [&str; 3] = ["flat-exp", "hyperbolic", "pareto3-curve"];

pub fn model_names() -> impl Iterator<Item = &'static str> {
    MODELS.iter().map(|(n, _)| *n)
}

/// JSON text of a bundled model; a trailing `.json` is ignored.
pub fn model_json(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    MODELS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn model_config(name: &str) -> Result<ModelConfig> {
    let text = model_json(name).ok_or_else(|| Error::invalid(format!("no bundled model named '{name}'")))?;
    ModelConfig::from_json_str(text)
}

pub fn model(name: &str) -> Result<RationalModel> {
    model_config(name)?.build()
}

pub fn curve(name: &str) -> Result<DiscountCurve> {
    match name {
        "flat-exp" => DiscountCurve::flat_exponential(0.03, 100.0),
        "hyperbolic" => DiscountCurve::tail_pareto(1.0, 0.02, 100.0),
        "pareto3-curve" => DiscountCurve::tail_pareto(3.0, 0.02, 100.0),
        _ => Err(Error::invalid(format!("no bundled curve named '{name}' (known: {})", CURVE_NAMES.join(", ")))),
    }
}
