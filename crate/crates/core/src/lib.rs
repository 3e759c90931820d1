//! Quantum kicked rotor with Bohm trajectories.
//!
//! The wavefunction is carried in the angular-momentum basis and advanced
//! exactly across each period (free phase, then the kick as a Bessel
//! convolution). Between kicks it is available in closed form, which drives
//! the guidance-law and quantum-potential trajectory integrators. A Standard
//! Map module supplies the classical comparison.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*F64` aliases
//! below name the double-precision instantiations.

// `!(x > 0)` is used on purpose so that NaN fails domain checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod bohm;
pub mod classical;
pub mod diagnostics;
pub mod error;
pub mod ode;
pub mod rotor;
pub mod scalar;
pub mod spectral;

pub use bohm::{
    bohm_velocity, integrate_bohm_trajectory, integrate_newton_trajectory, quantum_force, quantum_potential,
    BohmField, Dynamics, Trajectory, TrajectoryConfig, TrajectorySample,
};
pub use classical::{
    classical_energy_series, lyapunov_exponent, map_trajectory, standard_map_step, MapState, MomentumInit,
};
pub use diagnostics::{
    divergence_report, linear_fit, mean_energy, poincare_section, quantum_energy_series, DivergenceCriteria,
    DivergenceReport, PoincareSection, Verdict,
};
pub use error::{Error, NodeEvent, Result};
pub use ode::StepControl;
pub use rotor::{
    make_cosine_superposition, make_eigenstate, make_gaussian_packet, make_two_mode, wrap_angle, Angle, RotorParams,
    SpectralState,
};
pub use scalar::Real;
pub use spectral::{EvolutionTimeline, TruncationPolicy};

pub type RotorParamsF64 = RotorParams<f64>;
pub type SpectralStateF64 = SpectralState<f64>;
pub type TimelineF64 = EvolutionTimeline<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryConfigF64 = TrajectoryConfig<f64>;
pub type MapStateF64 = MapState<f64>;
pub type DivergenceReportF64 = DivergenceReport<f64>;
