//! Number formatting and report files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use longrate_core::report::{fmt_sig, Audit, Verdict};
use serde::Serialize;
use serde_json::Value;

use crate::Outcome;

pub fn f(x: f64) -> String {
    fmt_sig(x)
}

/// Rounds every float in a JSON tree to 9 significant digits.
fn round(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            fmt_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round(v))).collect()),
        other => other,
    }
}

pub fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let value = round(serde_json::to_value(report)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn maybe_json<T: Serialize>(path: Option<&Path>, report: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, report),
        None => Ok(()),
    }
}

/// Writes a CSV through `emit`, which receives a buffered file and the number formatter.
pub fn write_file(
    path: &Path,
    emit: impl FnOnce(&mut BufWriter<File>) -> longrate_core::Result<()>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    emit(&mut w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// One line per check, then the overall verdict.
pub fn print_audit(report: &dyn Audit) -> Outcome {
    for c in report.checks() {
        println!("{} {}: {}", c.verdict, c.name, c.detail);
    }
    let verdict = report.verdict();
    println!("VERDICT {verdict}");
    if verdict == Verdict::Fail {
        Outcome::AuditFailed
    } else {
        Outcome::Done
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn json_floats_are_rounded() {
        let v = round(json!({"a": 0.1 + 0.2, "b": [1.0 / 3.0, 7], "c": "x"}));
        assert_eq!(v, json!({"a": 0.3, "b": [0.333333333, 7], "c": "x"}));
    }
}
