use longrate_core::aggregation::{
    aggregate_discount, asymptotic_exponential_rate, default_horizon_schedule, sample_calamity_time, RateMixture,
};

#[test]
fn gamma_mixture_survival_is_tail_pareto() {
    let (shape, mean) = (2.0, 0.05);
    let mix = RateMixture::gamma(shape, mean).unwrap();
    let sample = sample_calamity_time(&mix, 100_000, 77, 1e4).unwrap();
    for t in [1.0, 2.0, 5.0, 10.0, 20.0, 40.0, 60.0, 100.0, 200.0, 500.0] {
        let exact = (1.0 + mean * t / shape).powf(-shape);
        let s = sample.survival(t);
        assert!(s.agrees_with(exact, 4.0), "t={t}: {} +- {} vs {exact}", s.mean, s.std_error);
        assert!((aggregate_discount(&mix, t).unwrap() - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn discrete_mixture_rate_tends_to_smallest_rate() {
    let mix = RateMixture::discrete(vec![0.2, 0.5, 0.3], vec![0.01, 0.03, 0.06]).unwrap();
    let est = asymptotic_exponential_rate(&mix, &default_horizon_schedule()).unwrap();
    assert!((est.value - 0.01).abs() < 1e-4, "{}", est.value);
    assert_eq!(est.target, 0.01);
}
