//! Bohm dynamics on the circle.
//!
//! With `ψ = R e^{iS/ħ}` the guidance law reads `I dθ/dt = ∂S/∂θ =
//! ħ Im(ψ* ∂ψ)/|ψ|²`. The quantum potential `Q = -(ħ²/2I) R''/R` and its
//! force `-∂Q/∂θ` are evaluated from the exact spectral derivatives of `ψ`
//! through `ρ = |ψ|²`:
//!
//! ```text
//! R''/R       = ρ''/(2ρ) - ρ'²/(4ρ²)
//! ∂(R''/R)/∂θ = ρ'''/(2ρ) - ρ'ρ''/ρ² + ρ'³/(2ρ³)
//! ```

use crate::error::{Error, NodeEvent, Result};
use crate::ode::{integrate, IntegratorStats, StepControl};
use crate::rotor::Angle;
use crate::scalar::Real;
use crate::spectral::{EvolutionTimeline, PsiSample};

/// Default node floor as a multiple of the mean density `1/2π`.
pub const DEFAULT_NODE_FLOOR_FACTOR: f64 = 1e-10;

/// How a trajectory was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// Integral curve of the guidance law.
    VelocityLaw,
    /// Second-order quantum-potential dynamics.
    Newton,
    /// Classical Standard Map iterates.
    ClassicalMap,
}

/// One point along a path. At kick instants a path carries two samples with
/// the same `t`: the pre-kick one (`kick = N - 1`) followed by the post-kick
/// one (`kick = N`), so `(t, kick)` is strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    /// Number of kicks already applied to the guiding wavefunction.
    pub kick: usize,
    pub angle: Angle<T>,
    pub p_theta: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta<T> {
    pub dynamics: Dynamics,
    pub theta0: T,
    /// Initial angular velocity for Newton paths.
    pub omega0: Option<T>,
    pub stats: IntegratorStats<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    samples: Vec<TrajectorySample<T>>,
    pub meta: TrajectoryMeta<T>,
}

impl<T: Real> Trajectory<T> {
    /// Assemble a path from samples, checking the `(t, kick)` ordering.
    pub fn new(samples: Vec<TrajectorySample<T>>, meta: TrajectoryMeta<T>) -> Result<Self> {
        for w in samples.windows(2) {
            let ok = w[1].t > w[0].t || (w[1].t == w[0].t && w[1].kick > w[0].kick);
            if !ok {
                return Err(Error::SamplingContract(format!(
                    "samples out of order at t = {}",
                    w[1].t.as_f64()
                )));
            }
        }
        Ok(Self { samples, meta })
    }

    pub fn samples(&self) -> &[TrajectorySample<T>] {
        &self.samples
    }

    pub fn first(&self) -> &TrajectorySample<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample<T> {
        self.samples.last().expect("trajectory has samples")
    }

    /// Unwrapped angle at `t`, linearly interpolated between samples.
    pub fn unwrapped_at(&self, t: T) -> Option<T> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > self.last().t {
            return None;
        }
        let idx = s.partition_point(|x| x.t < t);
        if idx < s.len() && s[idx].t == t {
            return Some(s[idx].angle.unwrapped);
        }
        let (a, b) = (&s[idx - 1], &s[idx]);
        let w = (t - a.t) / (b.t - a.t);
        Some(a.angle.unwrapped + w * (b.angle.unwrapped - a.angle.unwrapped))
    }
}

/// Settings for trajectory integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig<T> {
    pub control: StepControl<T>,
    /// Node floor as a multiple of the mean density `1/2π`.
    pub node_floor_factor: T,
    /// Output samples per kick period (kick instants are always sampled).
    pub cadence: usize,
}

impl<T: Real> Default for TrajectoryConfig<T> {
    fn default() -> Self {
        Self {
            control: StepControl::default(),
            node_floor_factor: T::lit(DEFAULT_NODE_FLOOR_FACTOR),
            cadence: 20,
        }
    }
}

impl<T: Real> TrajectoryConfig<T> {
    pub fn with_tolerance(mut self, tol: T) -> Self {
        self.control = StepControl::with_tolerance(tol);
        self
    }

    pub fn with_cadence(mut self, cadence: usize) -> Self {
        self.cadence = cadence.max(1);
        self
    }
}

/// Velocity field, quantum potential and quantum force of a timeline.
#[derive(Debug, Clone, Copy)]
pub struct BohmField<'a, T> {
    timeline: &'a EvolutionTimeline<T>,
    node_floor: T,
}

impl<'a, T: Real> BohmField<'a, T> {
    pub fn new(timeline: &'a EvolutionTimeline<T>) -> Self {
        Self::with_floor_factor(timeline, T::lit(DEFAULT_NODE_FLOOR_FACTOR))
    }

    pub fn with_floor_factor(timeline: &'a EvolutionTimeline<T>, factor: T) -> Self {
        Self {
            timeline,
            node_floor: factor / T::TAU(),
        }
    }

    pub fn timeline(&self) -> &'a EvolutionTimeline<T> {
        self.timeline
    }

    /// Absolute density below which evaluation is refused.
    pub fn node_floor(&self) -> T {
        self.node_floor
    }

    fn checked(&self, s: PsiSample<T>, theta: T, t: T) -> std::result::Result<PsiSample<T>, NodeEvent> {
        if s.density < self.node_floor || !s.density.is_finite() {
            Err(NodeEvent {
                time: t.as_f64(),
                angle: theta.as_f64(),
                density: s.density.as_f64(),
            })
        } else {
            Ok(s)
        }
    }

    fn sample(&self, theta: T, t: T) -> Result<PsiSample<T>> {
        let s = self.timeline.evaluate_psi(theta, t)?;
        self.checked(s, theta, t).map_err(Error::NodeProximity)
    }

    fn sample_in_epoch(&self, epoch: usize, theta: T, t: T) -> std::result::Result<PsiSample<T>, NodeEvent> {
        self.checked(self.timeline.evaluate_in_epoch(epoch, theta, t), theta, t)
    }

    /// Velocity and density from the first-order sample only.
    fn velocity_in_epoch(&self, epoch: usize, theta: T, t: T) -> std::result::Result<([T; 1], T), NodeEvent> {
        let (psi, d1) = self.timeline.first_order_in_epoch(epoch, theta, t);
        let density = psi.norm_sqr();
        if density < self.node_floor || !density.is_finite() {
            return Err(NodeEvent {
                time: t.as_f64(),
                angle: theta.as_f64(),
                density: density.as_f64(),
            });
        }
        let p = self.timeline.params();
        Ok(([p.hbar / p.inertia * (psi.conj() * d1).im / density], density))
    }

    fn velocity_of(&self, s: &PsiSample<T>) -> T {
        let p = self.timeline.params();
        p.hbar / p.inertia * s.phase_gradient()
    }

    fn potential_of(&self, s: &PsiSample<T>) -> T {
        let p = self.timeline.params();
        let (r1, r2, _) = s.density_derivatives();
        let rho = s.density;
        let r_ratio = r2 / (T::lit(2.0) * rho) - r1 * r1 / (T::lit(4.0) * rho * rho);
        -(p.hbar * p.hbar) / (T::lit(2.0) * p.inertia) * r_ratio
    }

    fn force_of(&self, s: &PsiSample<T>) -> T {
        let p = self.timeline.params();
        let (r1, r2, r3) = s.density_derivatives();
        let rho = s.density;
        let two = T::lit(2.0);
        let d_ratio = r3 / (two * rho) - r1 * r2 / (rho * rho) + r1 * r1 * r1 / (two * rho * rho * rho);
        p.hbar * p.hbar / (two * p.inertia) * d_ratio
    }

    /// `dθ/dt = (ħ/I) Im(ψ*∂ψ)/|ψ|²`.
    pub fn velocity(&self, theta: T, t: T) -> Result<T> {
        Ok(self.velocity_of(&self.sample(theta, t)?))
    }

    /// Angular momentum `∂S/∂θ`.
    pub fn momentum(&self, theta: T, t: T) -> Result<T> {
        Ok(self.velocity(theta, t)? * self.timeline.params().inertia)
    }

    pub fn quantum_potential(&self, theta: T, t: T) -> Result<T> {
        Ok(self.potential_of(&self.sample(theta, t)?))
    }

    /// Torque `-∂Q/∂θ`.
    pub fn quantum_force(&self, theta: T, t: T) -> Result<T> {
        Ok(self.force_of(&self.sample(theta, t)?))
    }
}

pub fn bohm_velocity<T: Real>(timeline: &EvolutionTimeline<T>, theta: T, t: T) -> Result<T> {
    BohmField::new(timeline).velocity(theta, t)
}

pub fn quantum_potential<T: Real>(timeline: &EvolutionTimeline<T>, theta: T, t: T) -> Result<T> {
    BohmField::new(timeline).quantum_potential(theta, t)
}

pub fn quantum_force<T: Real>(timeline: &EvolutionTimeline<T>, theta: T, t: T) -> Result<T> {
    BohmField::new(timeline).quantum_force(theta, t)
}

/// One stretch of free evolution between kicks.
struct Segment<T> {
    epoch: usize,
    start: T,
    end: T,
    /// Output times in `(start, end]`, the last one being `end`.
    stops: Vec<T>,
    /// Whether `end` is a kick instant with a post-kick epoch available.
    ends_at_kick: bool,
}

fn segments<T: Real>(timeline: &EvolutionTimeline<T>, t_start: T, t_end: T, cadence: usize) -> Result<Vec<Segment<T>>> {
    if !(t_end >= t_start) {
        return Err(Error::Incompatible(format!(
            "empty time span [{}, {}]",
            t_start.as_f64(),
            t_end.as_f64()
        )));
    }
    let first = timeline.epoch_index(t_start)?;
    timeline.epoch_index(t_end)?;
    let period = timeline.params().period;
    let cad = T::from_index(cadence as i64);
    let mut out = Vec::new();
    let mut n = first;
    loop {
        let kick_t = T::from_index(n as i64) * period;
        let next_kick = T::from_index(n as i64 + 1) * period;
        let start = if n == first { t_start } else { kick_t };
        let end = next_kick.min(t_end);
        let mut stops: Vec<T> = (1..cadence)
            .map(|m| kick_t + T::from_index(m as i64) * period / cad)
            .filter(|&s| s > start && s < end)
            .collect();
        if end > start {
            stops.push(end);
        }
        let ends_at_kick = end == next_kick && n < timeline.n_kicks();
        out.push(Segment {
            epoch: n,
            start,
            end,
            stops,
            ends_at_kick,
        });
        if end >= t_end || n >= timeline.n_kicks() {
            break;
        }
        n += 1;
    }
    Ok(out)
}

/// Integral curve of the guidance law from `theta0` at `t_span.0`.
pub fn integrate_bohm_trajectory<T: Real>(
    timeline: &EvolutionTimeline<T>,
    theta0: T,
    t_span: (T, T),
    config: &TrajectoryConfig<T>,
) -> Result<Trajectory<T>> {
    let field = BohmField::with_floor_factor(timeline, config.node_floor_factor);
    let inertia = timeline.params().inertia;
    let segs = segments(timeline, t_span.0, t_span.1, config.cadence)?;
    let mut stats = IntegratorStats::default();
    let mut samples = Vec::new();
    let mut theta = theta0;
    let mut h = T::zero();

    let record = |samples: &mut Vec<TrajectorySample<T>>, epoch: usize, t: T, theta: T| -> Result<()> {
        let s = field.sample_in_epoch(epoch, wrap_for_eval(theta), t).map_err(Error::NodeProximity)?;
        samples.push(TrajectorySample {
            t,
            kick: epoch,
            angle: Angle::from_unwrapped(theta),
            p_theta: field.velocity_of(&s) * inertia,
        });
        Ok(())
    };

    record(&mut samples, segs[0].epoch, segs[0].start, theta)?;
    for seg in &segs {
        let epoch = seg.epoch;
        let mut pending: Vec<(T, T)> = Vec::with_capacity(seg.stops.len());
        let (y, h_next) = integrate(
            |t, y: &[T; 1]| field.velocity_in_epoch(epoch, wrap_for_eval(y[0]), t),
            seg.start,
            seg.end,
            [theta],
            h,
            &config.control,
            &seg.stops,
            |t, y, _| pending.push((t, y[0])),
            &mut stats,
        )?;
        for (t, th) in pending {
            record(&mut samples, epoch, t, th)?;
        }
        theta = y[0];
        h = h_next;
        if seg.ends_at_kick {
            record(&mut samples, epoch + 1, seg.end, theta)?;
        }
    }

    Trajectory::new(
        samples,
        TrajectoryMeta {
            dynamics: Dynamics::VelocityLaw,
            theta0,
            omega0: None,
            stats,
        },
    )
}

/// Solve `I θ̈ = -∂Q/∂θ` from `(theta0, omega0)`, adding the kick impulse
/// `-ħk sin θ` to the angular momentum at every kick instant.
///
/// No relation between `omega0` and `∂S/∂θ` is imposed.
pub fn integrate_newton_trajectory<T: Real>(
    timeline: &EvolutionTimeline<T>,
    theta0: T,
    omega0: T,
    t_span: (T, T),
    config: &TrajectoryConfig<T>,
) -> Result<Trajectory<T>> {
    let field = BohmField::with_floor_factor(timeline, config.node_floor_factor);
    let params = *timeline.params();
    let segs = segments(timeline, t_span.0, t_span.1, config.cadence)?;
    let mut stats = IntegratorStats::default();
    let mut samples = Vec::new();
    let mut y = [theta0, omega0];
    let mut h = T::zero();

    let sample_of = |t: T, kick: usize, y: &[T; 2]| TrajectorySample {
        t,
        kick,
        angle: Angle::from_unwrapped(y[0]),
        p_theta: y[1] * params.inertia,
    };

    field
        .sample_in_epoch(segs[0].epoch, wrap_for_eval(theta0), segs[0].start)
        .map_err(Error::NodeProximity)?;
    samples.push(sample_of(segs[0].start, segs[0].epoch, &y));
    for seg in &segs {
        let epoch = seg.epoch;
        let (y_end, h_next) = integrate(
            |t, y: &[T; 2]| {
                let s = field.sample_in_epoch(epoch, wrap_for_eval(y[0]), t)?;
                Ok(([y[1], field.force_of(&s) / params.inertia], s.density))
            },
            seg.start,
            seg.end,
            y,
            h,
            &config.control,
            &seg.stops,
            |t, y, _| samples.push(sample_of(t, epoch, y)),
            &mut stats,
        )?;
        y = y_end;
        h = h_next;
        if seg.ends_at_kick {
            let impulse = -(params.hbar * params.k) * y[0].sin();
            y[1] = y[1] + impulse / params.inertia;
            samples.push(sample_of(seg.end, epoch + 1, &y));
        }
    }

    Trajectory::new(
        samples,
        TrajectoryMeta {
            dynamics: Dynamics::Newton,
            theta0,
            omega0: Some(omega0),
            stats,
        },
    )
}

// Evaluating at the wrapped angle keeps e^{inθ} arguments small.
#[inline]
fn wrap_for_eval<T: Real>(theta: T) -> T {
    crate::rotor::wrap_angle(theta)
}
