//! Observables: mean energy, trajectory separation with growth-rate fits and
//! stroboscopic sections.

use crate::bohm::Trajectory;
use crate::error::{Error, Result};
use crate::rotor::{RotorParams, SpectralState};
use crate::scalar::Real;
use crate::spectral::EvolutionTimeline;

/// `⟨E⟩ = (ħ²/2I) Σ n²|a_n|²`.
pub fn mean_energy<T: Real>(state: &SpectralState<T>, params: &RotorParams<T>) -> T {
    let sum = state.modes().fold(T::zero(), |acc, (n, a)| {
        let nf = T::from_index(n);
        acc + nf * nf * a.norm_sqr()
    });
    params.hbar * params.hbar / (T::lit(2.0) * params.inertia) * sum
}

/// `⟨E⟩` in every epoch of the timeline, starting with the initial state.
pub fn quantum_energy_series<T: Real>(timeline: &EvolutionTimeline<T>) -> Vec<T> {
    timeline
        .epochs()
        .iter()
        .map(|s| mean_energy(s, timeline.params()))
        .collect()
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Incompatible(format!(
            "linear fit needs two or more paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = T::from_index(xs.len() as i64);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::Incompatible("linear fit over a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Divergent,
}

/// Thresholds for calling a separation series divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceCriteria<T> {
    /// Kick period, the unit of `rate_per_period`.
    pub period: T,
    /// Fitted exponential rate per period that must be exceeded.
    pub rate_per_period: T,
    /// Required ratio of peak to initial separation.
    pub min_growth: T,
    /// Fewest positive samples a fit may rest on.
    pub min_samples: usize,
}

impl<T: Real> DivergenceCriteria<T> {
    pub fn new(period: T) -> Self {
        Self {
            period,
            rate_per_period: T::lit(0.05),
            min_growth: T::lit(20.0),
            min_samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport<T> {
    pub times: Vec<T>,
    /// `|Δθ_unwrapped|` at each time.
    pub separations: Vec<T>,
    /// Slope of `ln(separation)` against time (per unit time).
    pub log_fit_rate: T,
    /// Time span of the samples entering the fit.
    pub fit_window: (T, T),
    /// Peak over initial separation.
    pub growth: T,
    pub verdict: Verdict,
}

impl<T: Real> DivergenceReport<T> {
    pub fn max_separation(&self) -> T {
        self.separations.iter().fold(T::zero(), |a, &s| a.max(s))
    }
}

/// Compare two paths on the union of their sample times inside the common
/// range, interpolating each linearly.
pub fn divergence_report<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    criteria: &DivergenceCriteria<T>,
) -> Result<DivergenceReport<T>> {
    let lo = a.first().t.max(b.first().t);
    let hi = a.last().t.min(b.last().t);
    if lo > hi {
        return Err(Error::Incompatible(format!(
            "trajectories cover disjoint times [{}, {}] and [{}, {}]",
            a.first().t.as_f64(),
            a.last().t.as_f64(),
            b.first().t.as_f64(),
            b.last().t.as_f64()
        )));
    }
    let mut times: Vec<T> = a
        .samples()
        .iter()
        .chain(b.samples())
        .map(|s| s.t)
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    times.sort_by(|x, y| x.partial_cmp(y).expect("finite sample times"));
    times.dedup();

    let separations: Vec<T> = times
        .iter()
        .map(|&t| {
            let ua = a.unwrapped_at(t).expect("inside common range");
            let ub = b.unwrapped_at(t).expect("inside common range");
            (ua - ub).abs()
        })
        .collect();

    let (xs, ys): (Vec<T>, Vec<T>) = times
        .iter()
        .zip(&separations)
        .filter(|(_, &s)| s > T::zero())
        .map(|(&t, &s)| (t, s.ln()))
        .unzip();
    let (log_fit_rate, fit_window) = match linear_fit(&xs, &ys) {
        Ok(fit) => (fit.slope, (xs[0], xs[xs.len() - 1])),
        Err(_) => (T::zero(), (lo, lo)),
    };

    let peak = separations.iter().fold(T::zero(), |m, &s| m.max(s));
    let growth = if peak == T::zero() {
        T::one()
    } else if separations[0] == T::zero() {
        T::infinity()
    } else {
        peak / separations[0]
    };
    let divergent = log_fit_rate * criteria.period > criteria.rate_per_period
        && growth > criteria.min_growth
        && xs.len() >= criteria.min_samples;
    Ok(DivergenceReport {
        times,
        separations,
        log_fit_rate,
        fit_window,
        growth,
        verdict: if divergent { Verdict::Divergent } else { Verdict::Bounded },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint<T> {
    pub kick: usize,
    pub theta: T,
    pub p_theta: T,
}

/// One `(N, θ(NT⁺), p_θ(NT⁺))` point per completed kick.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSection<T> {
    pub points: Vec<SectionPoint<T>>,
}

/// Pick the post-kick sample of every kick `1..=N_last` from a path.
pub fn poincare_section<T: Real>(trajectory: &Trajectory<T>, period: T) -> Result<PoincareSection<T>> {
    let samples = trajectory.samples();
    let last_kick = trajectory.last().kick;
    let mut points = Vec::with_capacity(last_kick);
    let mut cursor = 0;
    for n in 1..=last_kick {
        let t_n = T::from_index(n as i64) * period;
        let slack = T::lit(1e-9) * t_n.abs().max(T::one());
        while cursor < samples.len() && samples[cursor].kick < n {
            cursor += 1;
        }
        match samples.get(cursor) {
            Some(s) if s.kick == n && (s.t - t_n).abs() <= slack => points.push(SectionPoint {
                kick: n,
                theta: s.angle.wrapped,
                p_theta: s.p_theta,
            }),
            _ => {
                return Err(Error::SamplingContract(format!(
                    "no post-kick sample for kick {n} at t = {}",
                    t_n.as_f64()
                )))
            }
        }
    }
    Ok(PoincareSection { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotor::{make_eigenstate, RotorParams};

    #[test]
    fn eigenstate_energy() {
        let p = RotorParams::from_dimensionless(10.0f64, 0.5).unwrap();
        assert_eq!(mean_energy(&make_eigenstate(0), &p), 0.0);
        assert_eq!(mean_energy(&make_eigenstate(2), &p), 2.0);
    }

    #[test]
    fn exact_line() {
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0f64], &[1.0]).is_err());
    }
}
