use bohm_rotor::spectral::{apply_kick, free_propagate};
use bohm_rotor::{make_eigenstate, mean_energy, EvolutionTimeline, RotorParams, SpectralState, TruncationPolicy};
use num_complex::Complex;
use proptest::prelude::*;

fn random_state(parts: &[(f64, f64)]) -> SpectralState<f64> {
    let coeffs = parts.iter().map(|&(r, p)| Complex::from_polar(r + 0.05, p)).collect();
    SpectralState::from_coeffs(-(parts.len() as i64) / 2, coeffs)
        .unwrap()
        .normalized()
        .unwrap()
}

#[test]
fn free_rotor_timeline_never_changes_populations() {
    let p = RotorParams::from_dimensionless(0.0f64, 1.0).unwrap();
    let tl = EvolutionTimeline::build(p, make_eigenstate(2), 10, TruncationPolicy::default()).unwrap();
    for s in tl.epochs() {
        assert!((s.coeff(2).norm() - 1.0).abs() < 1e-15);
        assert!((mean_energy(s, &p) - 2.0).abs() < 1e-14);
    }
}

#[test]
fn epoch_times_sit_on_the_kick_grid() {
    let p = RotorParams::from_dimensionless(10.0, 0.5).unwrap();
    let tl = EvolutionTimeline::build(p, make_eigenstate(0), 30, TruncationPolicy::default()).unwrap();
    for (n, s) in tl.epochs().iter().enumerate() {
        assert_eq!(s.time, n as f64 * 0.5);
        assert_eq!(s.kicks_applied, n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Σ (n0 + s)² J_s(k)² = n0² + k²/2.
    #[test]
    fn one_kick_energy_matches_bessel_sum(n0 in -5i64..=5, k in 0.0f64..14.0, tau in 0.1f64..3.0) {
        let p = RotorParams::from_dimensionless(k, tau).unwrap();
        let out = apply_kick(&make_eigenstate(n0), &p, &TruncationPolicy::default()).unwrap();
        let expected = 0.5 * ((n0 * n0) as f64 + k * k / 2.0);
        prop_assert!((mean_energy(&out.state, &p) - expected).abs() < 1e-9 * (1.0 + expected));
    }

    #[test]
    fn kicks_are_unitary(parts in prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..9), k in 0.0f64..12.0) {
        let p = RotorParams::from_dimensionless(k, 0.5).unwrap();
        let mut s = random_state(&parts);
        for _ in 0..5 {
            let out = apply_kick(&s, &p, &TruncationPolicy::default()).unwrap();
            prop_assert!(out.norm_defect < 1e-10);
            s = out.state;
        }
    }

    #[test]
    fn free_propagation_keeps_populations(parts in prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..9), dt in 0.0f64..20.0) {
        let p = RotorParams::from_dimensionless(10.0, 0.5).unwrap();
        let s = random_state(&parts);
        let f = free_propagate(&s, dt, &p).unwrap();
        for ((_, a), (_, b)) in s.modes().zip(f.modes()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_ignores_global_phase(parts in prop::collection::vec((0.0f64..1.0, 0.0f64..6.3), 1..9), phi in 0.0f64..6.3) {
        let p = RotorParams::from_dimensionless(10.0, 0.5).unwrap();
        let s = random_state(&parts);
        let e = mean_energy(&s, &p);
        let r = mean_energy(&s.clone().with_global_phase(Complex::from_polar(1.0, phi)), &p);
        prop_assert!((e - r).abs() <= 1e-14 * (1.0 + e));
    }
}
