use longrate_core::kernel_models::{ModelState, RationalModel};
use longrate_core::zoo;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_factor_models() -> Vec<(&'static str, RationalModel)> {
    zoo::model_names()
        .map(|n| (n, zoo::model(n).unwrap()))
        .filter(|(_, m)| m.factors() == 1)
        .collect()
}

#[test]
fn bond_from_rates_matches_direct_quotient() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (name, model) in one_factor_models() {
        let RationalModel::OneFactor(m1) = &model else { unreachable!() };
        for _ in 0..100 {
            let t = rng.random_range(0.0..50.0);
            let m = rng.random_range(0.1..10.0);
            let big_t = t + rng.random_range(0.0..100.0);
            let state = ModelState::one_factor(t, m).unwrap();
            // quotient computed here from the coefficient functions
            let direct = (m1.a().value(big_t) + m1.b().value(big_t) * m) / (m1.a().value(t) + m1.b().value(t) * m);
            let r = m1.short_rate(&state).unwrap();
            let l = m1.long_pareto(&state).unwrap();
            let via_r = m1.bond_from_short_rate(t, big_t, r).unwrap();
            let via_l = m1.bond_from_long_rate(t, big_t, l).unwrap();
            assert!((via_r - direct).abs() <= 1e-10 * direct.max(1e-300), "{name}: short {via_r} vs {direct}");
            assert!((via_l - direct).abs() <= 1e-10 * direct.max(1e-300), "{name}: long {via_l} vs {direct}");
        }
    }
}

#[test]
fn two_factor_fgh_reconstruction() {
    let model = zoo::model("ref2f-fgh").unwrap();
    let RationalModel::TwoFactor(m2) = &model else { panic!("two-factor model expected") };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for &(t, big_t) in &[(1.0, 10.0), (0.0, 30.0), (5.0, 5.0), (12.5, 200.0)] {
        let fgh = m2.fgh_coefficients(t, big_t).unwrap();
        for _ in 0..100 {
            let (m, n) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
            let state = ModelState::two_factor(t, m, n).unwrap();
            let [a, b, c] = m2.coefficients();
            let direct = (a.value(big_t) + b.value(big_t) * m + c.value(big_t) * n)
                / (a.value(t) + b.value(t) * m + c.value(t) * n);
            let rebuilt = fgh.bond(m2.short_rate(&state).unwrap(), m2.long_libor(&state).unwrap());
            assert!((rebuilt - direct).abs() <= 1e-10, "t={t} T={big_t}: {rebuilt} vs {direct}");
        }
    }
}

#[test]
fn every_zoo_model_reprices_from_its_own_long_rate() {
    for name in zoo::model_names() {
        let model = zoo::model(name).unwrap();
        let state = model.initial_state();
        let l = model.long_rate(&state).unwrap();
        assert!(l.is_finite() && l > 0.0, "{name}: {l}");
        assert!(model.short_rate(&state).unwrap().is_finite());
    }
}
