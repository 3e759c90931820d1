use bohm_rotor::classical::{ensemble_member, lyapunov_exponent_with_interval, map_jacobian};
use bohm_rotor::{classical_energy_series, linear_fit, lyapunov_exponent, standard_map_step, MapState, MomentumInit};
use proptest::prelude::*;

#[test]
fn weak_kicks_leave_regular_orbits_regular() {
    let l = lyapunov_exponent(0.1f64, 20_000, MapState::new(1.0, 0.5)).unwrap();
    assert!(l.abs() <= 0.02, "lambda = {l}");
}

#[test]
fn renormalisation_interval_does_not_move_the_exponent() {
    let start = MapState::new(1.0f64, 0.5);
    let every = lyapunov_exponent_with_interval(5.0, 50_000, start, 1).unwrap();
    let sparse = lyapunov_exponent_with_interval(5.0, 50_000, start, 10).unwrap();
    assert!((every - sparse).abs() < 0.02, "{every} vs {sparse}");
}

#[test]
fn ensemble_energy_is_reproducible_and_seed_dependent() {
    let a = classical_energy_series(5.0f64, 500, 50, 7, MomentumInit::Uniform { offset: 0.0 }).unwrap();
    let b = classical_energy_series(5.0f64, 500, 50, 7, MomentumInit::Uniform { offset: 0.0 }).unwrap();
    let c = classical_energy_series(5.0f64, 500, 50, 8, MomentumInit::Uniform { offset: 0.0 }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(ensemble_member::<f64>(3, 11, MomentumInit::Fixed(0.0)), ensemble_member(3, 11, MomentumInit::Fixed(0.0)));
}

#[test]
fn strong_chaos_diffuses_linearly() {
    let e = classical_energy_series(5.0f64, 10_000, 200, 1, MomentumInit::Fixed(0.0)).unwrap();
    let xs: Vec<f64> = (0..e.len()).map(|n| n as f64).collect();
    let fit = linear_fit(&xs, &e).unwrap();
    assert!(fit.r_squared > 0.9, "R² = {}", fit.r_squared);
    // Quasilinear estimate K²/4 per kick, within a factor of two.
    assert!(fit.slope > 25.0 / 8.0 && fit.slope < 25.0 / 2.0, "slope = {}", fit.slope);
}

proptest! {
    #[test]
    fn jacobian_stays_unimodular_along_orbits(theta in 0.0f64..std::f64::consts::TAU, p in -5.0f64..5.0, k in 0.0f64..8.0) {
        let mut s = MapState::new(theta, p);
        for _ in 0..100 {
            let j = map_jacobian(s, k);
            prop_assert!((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs() < 1e-12);
            s = standard_map_step(s, k);
        }
    }
}
