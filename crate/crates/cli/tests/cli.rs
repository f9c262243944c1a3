use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn longrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longrate")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Value after `key` on the line starting with it.
fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no '{key}' in\n{text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn convert_exponential_to_libor() {
    let o = longrate(&["convert", "--t", "0", "--T", "10", "--from", "exp", "--to", "libor", "--value", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    // (e^{0.5} - 1) / 10
    assert!((field(&text, "libor ") - 0.5f64.exp_m1() / 10.0).abs() < 1e-9);
    assert!(field(&text, "round_trip_residual ") <= 1e-15);
}

#[test]
fn convert_same_convention_echoes() {
    let o = longrate(&["convert", "--T", "7", "--from", "pareto:2", "--to", "pareto:2", "--value", "0.031"]);
    assert_eq!(stdout(&o).lines().next().unwrap(), "pareto:2 0.031");
}

#[test]
fn convert_outside_domain_exits_2_naming_the_bound() {
    let o = longrate(&["convert", "--value", "-0.2", "--from", "libor", "--T", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("-0.1"), "{}", stderr(&o));
}

#[test]
fn longrate_of_reference_model() {
    let o = longrate(&["longrate", "--model", "ref1f.json", "--t", "0", "--conv", "libor"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("libor ") && first.ends_with(" CONVERGED"), "{first}");
    assert!((field(&text, "libor ") - 0.75).abs() < 1e-6);
    assert_eq!(field(&text, "closed_form "), 0.75);
}

#[test]
fn longrate_trace_and_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let report = dir.path().join("lr.json");
    let o = longrate(&[
        "longrate", "--curve", "hyperbolic", "--conv", "libor", "--t", "50",
        "--trace", trace.to_str().unwrap(), "--out", report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    // 0.02 / (1 + 0.02 * 50)
    assert_eq!(field(&stdout(&o), "propagated "), 0.01);
    let csv = std::fs::read_to_string(trace).unwrap();
    assert!(csv.starts_with("horizon,rate\n60,0.01\n"), "{csv}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["status"], "CONVERGED");
    assert_eq!(json["limit"], "FINITE");
}

#[test]
fn dir_audit_of_reference_model_passes() {
    let o = longrate(&["audit", "dir", "--model", "ref1f.json", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("VERDICT PASS\n"));
}

#[test]
fn bond_value_of_reference_model() {
    let o = longrate(&["value", "--model", "ref1f.json", "--flow", "T=10,amount=1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // (0.5/11 + 0.5/12) / 0.75
    let expected = (0.5 / 11.0 + 0.5 / 12.0) / 0.75;
    assert!((field(&stdout(&o), "value ") - expected).abs() < 1e-9);
}

#[test]
fn simulated_flow_without_seed_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let mut cfg: serde_json::Value = serde_json::from_str(longrate_core::zoo::model_json("ref1f").unwrap()).unwrap();
    cfg.as_object_mut().unwrap().remove("run");
    std::fs::write(&model, cfg.to_string()).unwrap();
    let o = longrate(&["value", "--model", model.to_str().unwrap(), "--flow", "T=1,M=1,cap=100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn failed_certificate_exits_1() {
    let o = longrate(&["audit", "pareto", "--model", "ref1f", "--index", "2", "--paths", "500"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("FAIL tail_kernel_mean_bounded"));
    assert!(text.ends_with("VERDICT FAIL\n"));
}

#[test]
fn stratification_of_index_two_model() {
    let o = longrate(&["audit", "strat", "--model", "pareto2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for expected in ["exp,", "pareto:3,", "pareto:2,", "pareto:1,"] {
        assert!(text.lines().any(|l| l.starts_with(expected)), "{expected} missing:\n{text}");
    }
    let kind = |c: &str| text.lines().find(|l| l.starts_with(c)).unwrap().rsplit(',').next().unwrap().to_string();
    assert_eq!(kind("exp,"), "ZERO");
    assert_eq!(kind("pareto:3,"), "ZERO");
    assert_eq!(kind("pareto:2,"), "FINITE");
    assert_eq!(kind("pareto:1,"), "INFINITE");
}

#[test]
fn missing_model_key_reports_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let mut cfg: serde_json::Value = serde_json::from_str(longrate_core::zoo::model_json("ref1f").unwrap()).unwrap();
    cfg["coefficients"]["b"]["params"].as_object_mut().unwrap().remove("scale");
    std::fs::write(&model, cfg.to_string()).unwrap();
    let o = longrate(&["audit", "dir", "--model", model.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("coefficients.b.params") && err.contains("scale"), "{err}");
}

#[test]
fn unknown_model_and_bad_thread_count_are_input_errors() {
    let o = longrate(&["value", "--model", "nope", "--flow", "T=1,amount=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ref1f"));
    let o = Command::new(env!("CARGO_BIN_EXE_longrate"))
        .args(["convert", "--T", "1", "--from", "exp", "--value", "0.1"])
        .env("LONGRATE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn greenbook_bundled_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("gb.csv");
    let schedule = data("greenbook.json");
    let o = longrate(&["greenbook", "--schedule", schedule.to_str().unwrap(), "--curve-out", curve.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row30 = text.lines().find(|l| l.starts_with("30,")).unwrap();
    let df: f64 = row30.split(',').nth(1).unwrap().parse().unwrap();
    assert!((df - (-1.05f64).exp()).abs() < 1e-9, "{row30}");
    assert!(field(&text, "time_consistency_residual ") > 0.0);
    assert!(text.contains("component catastrophe 0.01"));
    assert!(text.contains("class exponential rate=0.01"));
    assert!(std::fs::read_to_string(curve).unwrap().starts_with("maturity_years,discount_factor\n0,1\n"));
}

#[test]
fn greenbook_single_band_is_time_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("flat.json");
    std::fs::write(&schedule, r#"{"bands":[{"from":0,"rate":0.035}]}"#).unwrap();
    let o = longrate(&["greenbook", "--schedule", schedule.to_str().unwrap(), "--compounding", "spot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(field(&stdout(&o), "time_consistency_residual ") <= 1e-12);
}

#[test]
fn greenbook_gaps_and_overlaps_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (text, word) in [
        (r#"{"bands":[{"from":0,"to":30,"rate":0.035},{"from":31,"rate":0.03}]}"#, "gap"),
        (r#"{"bands":[{"from":0,"to":30,"rate":0.035},{"from":20,"rate":0.03}]}"#, "overlap"),
    ] {
        let schedule = dir.path().join("bad.json");
        std::fs::write(&schedule, text).unwrap();
        let o = longrate(&["greenbook", "--schedule", schedule.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err = stderr(&o);
        assert!(err.contains("bands[1].from") && err.contains(word), "{err}");
    }
}

#[test]
fn curve_export_reloads_with_a_tail() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.csv");
    let o = longrate(&["curve", "--curve", "hyperbolic", "--maturities", "10,100", "--out", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("maturity,discount_factor,exponential_rate,libor_rate\n"));
    // without a tail the 100-year curve is too short to classify
    let o = longrate(&["classify", "--curve", file.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().next().unwrap(), "class undetermined");
    let o = longrate(&["classify", "--curve", file.to_str().unwrap(), "--tail", "pareto:1:0.02", "--at", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("class tail-pareto lambda=0.99999"), "{text}");
    assert!(text.contains("long_rate t=50 libor 0.01\n"), "{text}");
}

#[test]
fn simulate_writes_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("paths.csv");
    let o = longrate(&["simulate", "--model", "ref2f", "--paths", "4", "--grid", "1,2", "--out", file.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(file).unwrap();
    assert!(csv.starts_with("path,t,M,N\n0,0,1,1\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
    // E[pi_0] for ref2f: a_0 + b_0 + c_0 = 0.4 + 0.3 + 0.15
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",0.85"));
}

#[test]
fn aggregate_gamma_mixture() {
    let o = longrate(&["aggregate", "--mixture", r#"{"kind":"gamma","shape":2,"mean_rate":0.05}"#, "--times", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // (1 + 0.05 * 10 / 2)^(-2)
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').nth(1).unwrap(), "0.64");
    let o = longrate(&["aggregate", "--mixture", r#"{"kind":"gamma","shape":-2,"mean_rate":0.05}"#]);
    assert_eq!(o.status.code(), Some(2));
}
