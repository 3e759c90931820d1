use bohm_rotor::bohm::TrajectoryMeta;
use bohm_rotor::ode::IntegratorStats;
use bohm_rotor::{divergence_report, Angle, DivergenceCriteria, Dynamics, Error, Trajectory, TrajectorySample, Verdict};
use proptest::prelude::*;

fn path(points: &[(f64, f64)]) -> Trajectory<f64> {
    let samples = points
        .iter()
        .map(|&(t, th)| TrajectorySample {
            t,
            kick: 0,
            angle: Angle::from_unwrapped(th),
            p_theta: 0.0,
        })
        .collect();
    let meta = TrajectoryMeta {
        dynamics: Dynamics::VelocityLaw,
        theta0: points[0].1,
        omega0: None,
        stats: IntegratorStats::default(),
    };
    Trajectory::new(samples, meta).unwrap()
}

#[test]
fn identical_paths_are_bounded() {
    let a = path(&(0..50).map(|i| (i as f64 * 0.1, (i as f64).sin())).collect::<Vec<_>>());
    let r = divergence_report(&a, &a, &DivergenceCriteria::new(0.5)).unwrap();
    assert!(r.separations.iter().all(|&s| s == 0.0));
    assert_eq!(r.verdict, Verdict::Bounded);
}

#[test]
fn disjoint_paths_cannot_be_compared() {
    let a = path(&[(0.0, 0.0), (1.0, 0.1)]);
    let b = path(&[(2.0, 0.0), (3.0, 0.1)]);
    assert!(matches!(divergence_report(&a, &b, &DivergenceCriteria::new(0.5)), Err(Error::Incompatible(_))));
}

#[test]
fn exponential_separation_is_divergent() {
    let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let a = path(&ts.iter().map(|&t| (t, 0.0)).collect::<Vec<_>>());
    let b = path(&ts.iter().map(|&t| (t, 1e-6 * (0.8 * t).exp())).collect::<Vec<_>>());
    let r = divergence_report(&a, &b, &DivergenceCriteria::new(0.5)).unwrap();
    assert!((r.log_fit_rate - 0.8).abs() < 1e-9);
    assert!(r.growth > 2000.0);
    assert_eq!(r.verdict, Verdict::Divergent);
}

#[test]
fn slow_growth_is_bounded() {
    let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let a = path(&ts.iter().map(|&t| (t, 0.0)).collect::<Vec<_>>());
    let b = path(&ts.iter().map(|&t| (t, 1e-3 * (1.0 + 0.1 * t))).collect::<Vec<_>>());
    let r = divergence_report(&a, &b, &DivergenceCriteria::new(0.5)).unwrap();
    assert_eq!(r.verdict, Verdict::Bounded);
}

proptest! {
    #[test]
    fn report_is_symmetric(
        xs in prop::collection::vec(-3.0f64..3.0, 12),
        ys in prop::collection::vec(-3.0f64..3.0, 17),
    ) {
        let a = path(&xs.iter().enumerate().map(|(i, &v)| (i as f64 * 0.3, v)).collect::<Vec<_>>());
        let b = path(&ys.iter().enumerate().map(|(i, &v)| (0.1 + i as f64 * 0.2, v)).collect::<Vec<_>>());
        let c = DivergenceCriteria::new(0.5);
        let ab = divergence_report(&a, &b, &c).unwrap();
        let ba = divergence_report(&b, &a, &c).unwrap();
        prop_assert_eq!(ab, ba);
    }
}
