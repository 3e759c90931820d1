use bohm_rotor::{
    integrate_bohm_trajectory, lyapunov_exponent, make_cosine_superposition, mean_energy, EvolutionTimeline, MapState,
    RotorParams, TrajectoryConfig, TruncationPolicy,
};

#[test]
fn f32_pipeline_runs() {
    let p = RotorParams::<f32>::from_dimensionless(0.0, 1.0).unwrap();
    let policy = TruncationPolicy {
        trim_below: 1e-7,
        populated_above: 1e-6,
        norm_tolerance: 1e-5,
        ..TruncationPolicy::default()
    };
    let tl = EvolutionTimeline::build(p, make_cosine_superposition(0.3f32), 13, policy).unwrap();
    assert!((mean_energy(&tl.epochs()[0], &p) - 0.0762712).abs() < 1e-5);
    let cfg = TrajectoryConfig::default().with_tolerance(1e-5);
    let tr = integrate_bohm_trajectory(&tl, 0.5f32, (0.0, 4.0 * std::f32::consts::PI), &cfg).unwrap();
    assert!((tr.last().angle.unwrapped - 0.5).abs() < 1e-3);
    let l = lyapunov_exponent(5.0f32, 5000, MapState::new(1.0, 0.5)).unwrap();
    assert!(l > 0.5 && l < 1.5);
}
