//! The classical kicked rotor as the Standard Map
//!
//! ```text
//! p' = p + K sin θ
//! θ' = θ + p'   (mod 2π)
//! ```
//!
//! in the dimensionless momentum `p = p_θ T / I`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bohm::{Dynamics, Trajectory, TrajectoryMeta, TrajectorySample};
use crate::error::{Error, Result};
use crate::ode::IntegratorStats;
use crate::rotor::{wrap_angle, Angle, RotorParams};
use crate::scalar::Real;

/// Smallest accepted iteration count for [`lyapunov_exponent`].
pub const MIN_LYAPUNOV_ITERATIONS: usize = 1000;
/// Smallest accepted ensemble for [`classical_energy_series`].
pub const MIN_ENSEMBLE_SIZE: usize = 100;

/// A point of the map's phase space with `theta` in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapState<T> {
    pub theta: T,
    pub p: T,
}

impl<T: Real> MapState<T> {
    pub fn new(theta: T, p: T) -> Self {
        Self {
            theta: wrap_angle(theta),
            p,
        }
    }
}

pub fn standard_map_step<T: Real>(s: MapState<T>, big_k: T) -> MapState<T> {
    let p = s.p + big_k * s.theta.sin();
    MapState {
        theta: wrap_angle(s.theta + p),
        p,
    }
}

/// Undo one [`standard_map_step`].
pub fn inverse_map_step<T: Real>(s: MapState<T>, big_k: T) -> MapState<T> {
    let theta = wrap_angle(s.theta - s.p);
    MapState {
        theta,
        p: s.p - big_k * theta.sin(),
    }
}

/// Jacobian `∂(θ', p')/∂(θ, p)` of one step taken from `s`.
pub fn map_jacobian<T: Real>(s: MapState<T>, big_k: T) -> [[T; 2]; 2] {
    let kc = big_k * s.theta.cos();
    [[T::one() + kc, T::one()], [kc, T::one()]]
}

/// Push a tangent vector `(δθ, δp)` through one step taken from `s`.
pub fn tangent_step<T: Real>(s: MapState<T>, big_k: T, v: [T; 2]) -> [T; 2] {
    let dp = v[1] + big_k * s.theta.cos() * v[0];
    [v[0] + dp, dp]
}

/// Largest Lyapunov exponent per kick, renormalizing the tangent vector every
/// step.
pub fn lyapunov_exponent<T: Real>(big_k: T, n_iter: usize, initial: MapState<T>) -> Result<T> {
    lyapunov_exponent_with_interval(big_k, n_iter, initial, 1)
}

/// As [`lyapunov_exponent`], renormalizing every `interval` steps.
pub fn lyapunov_exponent_with_interval<T: Real>(
    big_k: T,
    n_iter: usize,
    initial: MapState<T>,
    interval: usize,
) -> Result<T> {
    if n_iter < MIN_LYAPUNOV_ITERATIONS {
        return Err(Error::ParameterDomain {
            name: "n_iter",
            value: n_iter as f64,
            requirement: ">= 1000",
        });
    }
    if interval == 0 {
        return Err(Error::ParameterDomain {
            name: "renormalization interval",
            value: 0.0,
            requirement: ">= 1",
        });
    }
    let mut s = initial;
    let mut v = [T::one(), T::zero()];
    let mut log_sum = T::zero();
    for j in 1..=n_iter {
        v = tangent_step(s, big_k, v);
        s = standard_map_step(s, big_k);
        if j % interval == 0 || j == n_iter {
            let len = v[0].hypot(v[1]);
            log_sum = log_sum + len.ln();
            v = [v[0] / len, v[1] / len];
        }
    }
    Ok(log_sum / T::from_index(n_iter as i64))
}

/// How ensemble momenta are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumInit<T> {
    /// Every member starts with this momentum.
    Fixed(T),
    /// Uniform on `[offset, offset + 2π)`.
    Uniform { offset: T },
}

impl<T: Real> Default for MomentumInit<T> {
    fn default() -> Self {
        Self::Fixed(T::zero())
    }
}

/// Initial condition of ensemble member `index`. Each member draws from its
/// own ChaCha8 stream, so the result does not depend on evaluation order.
pub fn ensemble_member<T: Real>(seed: u64, index: u64, init: MomentumInit<T>) -> MapState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let tau = std::f64::consts::TAU;
    let theta = T::lit(rng.gen_range(0.0..tau));
    let p = match init {
        MomentumInit::Fixed(p) => p,
        MomentumInit::Uniform { offset } => offset + T::lit(rng.gen_range(0.0..tau)),
    };
    MapState::new(theta, p)
}

/// Ensemble mean of `p²/2` before any kick and after each of `n_kicks` kicks
/// (`n_kicks + 1` values).
pub fn classical_energy_series<T: Real>(
    big_k: T,
    ensemble_size: usize,
    n_kicks: usize,
    seed: u64,
    init: MomentumInit<T>,
) -> Result<Vec<T>> {
    if ensemble_size < MIN_ENSEMBLE_SIZE {
        return Err(Error::ParameterDomain {
            name: "ensemble_size",
            value: ensemble_size as f64,
            requirement: ">= 100",
        });
    }
    let mut sums = vec![T::zero(); n_kicks + 1];
    for m in 0..ensemble_size {
        let mut s = ensemble_member(seed, m as u64, init);
        sums[0] = sums[0] + s.p * s.p;
        for acc in sums.iter_mut().skip(1) {
            s = standard_map_step(s, big_k);
            *acc = *acc + s.p * s.p;
        }
    }
    let scale = (T::lit(2.0) * T::from_index(ensemble_size as i64)).recip();
    Ok(sums.into_iter().map(|v| v * scale).collect())
}

/// Map iterates as a [`Trajectory`]: iterate `N` is stored at `t = N·T` with
/// `kick = N`, the unwrapped angle tracked across turns and `p_θ = p I/T`.
pub fn map_trajectory<T: Real>(params: &RotorParams<T>, initial: MapState<T>, n_kicks: usize) -> Result<Trajectory<T>> {
    let big_k = params.big_k;
    let scale = params.momentum_scale();
    let mut s = initial;
    let mut unwrapped = initial.theta;
    let mut samples = Vec::with_capacity(n_kicks + 1);
    let sample = |n: usize, unwrapped: T, p: T| TrajectorySample {
        t: T::from_index(n as i64) * params.period,
        kick: n,
        angle: Angle::from_unwrapped(unwrapped),
        p_theta: p * scale,
    };
    samples.push(sample(0, unwrapped, s.p));
    for n in 1..=n_kicks {
        let p = s.p + big_k * s.theta.sin();
        unwrapped = unwrapped + p;
        s = MapState {
            theta: wrap_angle(s.theta + p),
            p,
        };
        samples.push(sample(n, unwrapped, p));
    }
    Trajectory::new(
        samples,
        TrajectoryMeta {
            dynamics: Dynamics::ClassicalMap,
            theta0: initial.theta,
            omega0: Some(initial.p * scale / params.inertia),
            stats: IntegratorStats::default(),
        },
    )
}
