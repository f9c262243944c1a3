use longrate_core::asymptotics::{
    default_long_rate_schedule, deterministic_long_rate, dir_curve_audit, dir_monotonicity_audit, estimate_long_rate,
    pareto_kernel_certificate, LimitKind,
};
use longrate_core::montecarlo::simulate_paths;
use longrate_core::report::{Audit, Verdict};
use longrate_core::termstructure::{DiscountCurve, RateConvention};
use longrate_core::zoo;

const GRID: [f64; 13] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1e3, 2e3, 5e3, 1e4];

#[test]
fn long_exponential_rate_vanishes_for_every_zoo_model() {
    let times = [0.0, 1.0, 5.0, 20.0, 100.0, 1e3];
    for name in zoo::model_names() {
        let model = zoo::model(name).unwrap();
        let ens = simulate_paths(&model.drivers(), &GRID, 100, 7, model.correlation()).unwrap();
        let rep = dir_monotonicity_audit(&model, &ens, &times, &default_long_rate_schedule()).unwrap();
        assert_eq!(rep.verdict(), Verdict::Pass, "{name}: {:#?}", rep.checks);
        assert!(rep.rows.iter().all(|r| r.max_long_exponential <= 1e-6), "{name}");
    }
}

#[test]
fn deterministic_curves_have_constant_long_exponential_rate() {
    for name in zoo::CURVE_NAMES {
        let curve = zoo::curve(name).unwrap();
        let rep = dir_curve_audit(&curve, &[0.0, 10.0, 50.0, 100.0, 500.0], &default_long_rate_schedule()).unwrap();
        assert_eq!(rep.verdict(), Verdict::Pass, "{name}: {:#?}", rep.checks);
    }
}

#[test]
fn propagated_long_rates_match_estimates_at_one_million_years() {
    let schedule = longrate_core::numeric::geometric_grid(10.0, 1e6, 4);
    for index in [0.5, 1.0, 2.0, 3.0] {
        let curve = DiscountCurve::tail_pareto(index, 0.02, 100.0).unwrap();
        let conv = RateConvention::tail_pareto(index).unwrap();
        for t in [0.0, 1.0, 30.0, 100.0, 400.0] {
            let closed = deterministic_long_rate(&curve, t, conv).unwrap().value();
            let est = estimate_long_rate(&curve, t, conv, &schedule).unwrap();
            assert!((est.value - closed).abs() < 1e-4, "index {index}, t {t}: {} vs {closed}", est.value);
        }
    }
}

#[test]
fn certificate_passes_at_declared_index_only() {
    for name in zoo::model_names() {
        let model = zoo::model(name).unwrap();
        let ens = simulate_paths(&model.drivers(), &GRID, 5000, 13, model.correlation()).unwrap();
        let lambda = model.lambda();
        let good = pareto_kernel_certificate(&model, &ens, lambda).unwrap();
        assert_eq!(good.verdict(), Verdict::Pass, "{name}: {:#?}", good.checks);
        for wrong in [lambda / 2.0, lambda * 2.0] {
            let bad = pareto_kernel_certificate(&model, &ens, wrong).unwrap();
            assert_eq!(bad.verdict(), Verdict::Fail, "{name} at {wrong}");
        }
    }
}

#[test]
fn libor_long_rate_of_exponential_curve_diverges() {
    let curve = zoo::curve("flat-exp").unwrap();
    let e = estimate_long_rate(&curve, 3.0, RateConvention::Libor, &default_long_rate_schedule()).unwrap();
    assert_eq!(e.limit, LimitKind::Infinite);
}
