use std::f64::consts::{PI, TAU};

use bohm_rotor::bohm::TrajectoryMeta;
use bohm_rotor::ode::IntegratorStats;
use bohm_rotor::{
    integrate_bohm_trajectory, make_cosine_superposition, make_eigenstate, make_gaussian_packet, map_trajectory,
    poincare_section, Angle, Dynamics, Error, EvolutionTimeline, MapState, RotorParams, Trajectory,
    TrajectoryConfig, TrajectorySample, TruncationPolicy,
};
use proptest::prelude::*;

fn fig2_timeline(kicks: usize) -> EvolutionTimeline<f64> {
    let p = RotorParams::new(1.0, 1.0, 20f64.sqrt(), 0.5).unwrap();
    EvolutionTimeline::build(p, make_eigenstate(0), kicks, TruncationPolicy::default()).unwrap()
}

#[test]
fn eigenstate_section_advances_uniformly() {
    let p = RotorParams::from_dimensionless(0.0f64, 0.5).unwrap();
    let tl = EvolutionTimeline::build(p, make_eigenstate(3), 12, TruncationPolicy::default()).unwrap();
    let tr = integrate_bohm_trajectory(&tl, 0.4, (0.0, 6.0), &TrajectoryConfig::default()).unwrap();
    let sec = poincare_section(&tr, 0.5).unwrap();
    assert_eq!(sec.points.len(), 12);
    for pt in &sec.points {
        let expected = (0.4 + 3.0 * pt.kick as f64 * 0.5).rem_euclid(TAU);
        assert!((pt.theta - expected).abs() < 1e-9, "kick {}", pt.kick);
        assert!((pt.p_theta - 3.0).abs() < 1e-12);
    }
}

#[test]
fn kicked_section_has_one_point_per_kick() {
    let tl = fig2_timeline(80);
    let cfg = TrajectoryConfig::default().with_tolerance(1e-6).with_cadence(1);
    let tr = integrate_bohm_trajectory(&tl, 30f64.to_radians(), (0.0, 40.0), &cfg).unwrap();
    let sec = poincare_section(&tr, 0.5).unwrap();
    assert_eq!(sec.points.len(), 80);
    for (i, pt) in sec.points.iter().enumerate() {
        assert_eq!(pt.kick, i + 1);
    }
}

#[test]
fn missing_kick_sample_is_a_contract_error() {
    let sample = |t: f64, kick: usize| TrajectorySample {
        t,
        kick,
        angle: Angle::from_unwrapped(0.1),
        p_theta: 0.0,
    };
    let tr = Trajectory::new(
        vec![sample(0.0, 0), sample(0.5, 0), sample(0.5, 1), sample(1.2, 3)],
        TrajectoryMeta {
            dynamics: Dynamics::VelocityLaw,
            theta0: 0.1,
            omega0: None,
            stats: IntegratorStats::default(),
        },
    )
    .unwrap();
    assert!(matches!(poincare_section(&tr, 0.5), Err(Error::SamplingContract(_))));
}

#[test]
fn map_adapter_section_is_the_raw_orbit() {
    let p = RotorParams::from_dimensionless(10.0f64, 0.5).unwrap();
    let start = MapState::new(0.5, 0.2);
    let tr = map_trajectory(&p, start, 50).unwrap();
    let sec = poincare_section(&tr, p.period).unwrap();
    let mut s = start;
    for pt in &sec.points {
        s = bohm_rotor::standard_map_step(s, p.big_k);
        assert!((pt.theta - s.theta).abs() < 1e-12);
        assert!((pt.p_theta - s.p * p.momentum_scale()).abs() < 1e-12);
    }
}

#[test]
fn nearby_paths_keep_their_order() {
    let tl = fig2_timeline(4);
    let cfg = TrajectoryConfig::default();
    let paths: Vec<_> = (0..10)
        .map(|j| integrate_bohm_trajectory(&tl, 0.2 + 0.6 * j as f64, (0.0, 2.0), &cfg).unwrap())
        .collect();
    for i in 0..paths[0].samples().len() {
        for w in paths.windows(2) {
            assert!(w[0].samples()[i].angle.unwrapped < w[1].samples()[i].angle.unwrapped);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let p = RotorParams::new(1.0, 1.0, 20f64.sqrt(), 0.5).unwrap();
    let build = || EvolutionTimeline::build(p, make_gaussian_packet(2.0, 0.5, 0.0).unwrap(), 3, TruncationPolicy::default()).unwrap();
    let cfg = TrajectoryConfig::default();
    let a = integrate_bohm_trajectory(&build(), 0.3, (0.0, 1.5), &cfg).unwrap();
    let b = integrate_bohm_trajectory(&build(), 0.3, (0.0, 1.5), &cfg).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // (1+2a²)θ + a² sin 2θ + 4a cos(t/2) sin θ is constant along the flow.
    #[test]
    fn superposition_paths_conserve_the_implicit_invariant(a in 0.05f64..0.45, theta0 in -2.8f64..2.8) {
        let p = RotorParams::from_dimensionless(0.0f64, 1.0).unwrap();
        let tl = EvolutionTimeline::build_until(p, make_cosine_superposition(a), 4.0 * PI, TruncationPolicy::default()).unwrap();
        let tr = integrate_bohm_trajectory(&tl, theta0, (0.0, 4.0 * PI), &TrajectoryConfig::default()).unwrap();
        let inv = |th: f64, t: f64| (1.0 + 2.0 * a * a) * th + a * a * (2.0 * th).sin() + 4.0 * a * (t / 2.0).cos() * th.sin();
        let f0 = inv(theta0, 0.0);
        for s in tr.samples() {
            prop_assert!((inv(s.angle.unwrapped, s.t) - f0).abs() < 1e-7);
        }
        prop_assert!((tr.last().angle.unwrapped - theta0).abs() < 1e-6);
    }
}
