//! Embedded Dormand–Prince 5(4) integrator with a node guard.
//!
//! The right-hand side may refuse to evaluate (returning a [`NodeEvent`]) when
//! a stage lands too close to a node of the wavefunction. Such steps are
//! halved; after [`StepControl::max_halvings`] consecutive refusals the
//! integration fails.

use crate::error::{Error, NodeEvent, Result};
use crate::scalar::Real;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    pub max_halvings: u32,
    /// Hard limit on attempted steps per call to [`integrate`].
    pub max_steps: usize,
}

impl<T: Real> StepControl<T> {
    pub fn with_tolerance(tol: T) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_halvings: 40,
            max_steps: 5_000_000,
        }
    }
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        Self::with_tolerance(T::lit(1e-9))
    }
}

/// Counters accumulated over an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorStats<T> {
    pub steps: usize,
    pub rejections: usize,
    pub node_halvings: usize,
    /// Smallest density seen at any right-hand-side evaluation.
    pub min_density: T,
}

impl<T: Real> Default for IntegratorStats<T> {
    fn default() -> Self {
        Self {
            steps: 0,
            rejections: 0,
            node_halvings: 0,
            min_density: T::infinity(),
        }
    }
}

impl<T: Real> IntegratorStats<T> {
    pub fn merge(&mut self, other: &Self) {
        self.steps += other.steps;
        self.rejections += other.rejections;
        self.node_halvings += other.node_halvings;
        self.min_density = self.min_density.min(other.min_density);
    }
}

/// Value of the vector field together with the density at the evaluation point.
pub type FieldValue<T, const N: usize> = std::result::Result<([T; N], T), NodeEvent>;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`, FSAL).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = f(t, y)` from `t0` to `t1`, landing exactly on each time in
/// `stops` (ascending, inside `(t0, t1]`) and calling `on_stop` there.
///
/// `h` is the initial step guess; the last accepted step size is returned so
/// consecutive calls can continue smoothly.
#[allow(clippy::too_many_arguments)]
pub fn integrate<T, const N: usize, F, S>(
    mut f: F,
    t0: T,
    t1: T,
    y0: [T; N],
    h: T,
    control: &StepControl<T>,
    stops: &[T],
    mut on_stop: S,
    stats: &mut IntegratorStats<T>,
) -> Result<([T; N], T)>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> FieldValue<T, N>,
    S: FnMut(T, &[T; N], T),
{
    let lit = T::lit;
    let mut t = t0;
    let mut y = y0;
    let span = t1 - t0;
    let mut h = if h > T::zero() { h.min(span) } else { span * lit(1e-3) };
    if span <= T::zero() {
        return Ok((y, h));
    }
    let min_h = T::epsilon() * lit(64.0) * t1.abs().max(T::one());

    let (mut k0, d0) = f(t, &y).map_err(Error::NodeProximity)?;
    stats.min_density = stats.min_density.min(d0);
    let mut stop_idx = 0;
    let mut halvings = 0u32;
    let mut err_prev = lit(1e-4);
    let mut attempts = 0usize;

    while t < t1 {
        attempts += 1;
        if attempts > control.max_steps {
            return Err(Error::Incompatible(format!(
                "step budget exhausted at t = {}",
                t.as_f64()
            )));
        }
        let target = if stop_idx < stops.len() { stops[stop_idx].min(t1) } else { t1 };
        let mut step = h;
        let mut hits_target = false;
        if t + step >= target - min_h {
            step = target - t;
            hits_target = true;
        }

        let mut k = [[T::zero(); N]; 7];
        k[0] = k0;
        let mut node: Option<NodeEvent> = None;
        let mut end_density = T::nan();
        for s in 1..7 {
            let mut ys = y;
            for (i, v) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc = acc + lit(a) * kj[i];
                    }
                }
                *v = *v + step * acc;
            }
            match f(t + lit(C[s]) * step, &ys) {
                Ok((ks, d)) => {
                    k[s] = ks;
                    stats.min_density = stats.min_density.min(d);
                    if s == 6 {
                        end_density = d;
                    }
                }
                Err(ev) => {
                    node = Some(ev);
                    break;
                }
            }
        }
        if let Some(ev) = node {
            halvings += 1;
            stats.node_halvings += 1;
            h = step * lit(0.5);
            if halvings > control.max_halvings || h < min_h {
                return Err(Error::NodeProximity(ev));
            }
            continue;
        }
        halvings = 0;

        let mut y_new = y;
        let mut err = T::zero();
        for i in 0..N {
            let mut hi5 = T::zero();
            let mut hi4 = T::zero();
            for s in 0..7 {
                hi5 = hi5 + lit(B5[s]) * k[s][i];
                hi4 = hi4 + lit(B4[s]) * k[s][i];
            }
            y_new[i] = y[i] + step * hi5;
            let sc = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
            let e = (step * (hi5 - hi4)).abs() / sc;
            err = err.max(e);
        }

        if err <= T::one() || step.abs() <= min_h {
            t = if hits_target { target } else { t + step };
            y = y_new;
            k0 = k[6];
            stats.steps += 1;
            // PI controller: exponents 0.7/5 and 0.4/5.
            let e = err.max(lit(1e-10));
            let grow = (lit(0.9) * e.powf(lit(-0.14)) * err_prev.powf(lit(0.08)))
                .min(lit(5.0))
                .max(lit(0.2));
            err_prev = e;
            // A step shortened to meet a stop says nothing about the natural size.
            if !hits_target || step >= h {
                h = step * grow;
            }
            while stop_idx < stops.len() && stops[stop_idx] <= t {
                if stops[stop_idx] == t || hits_target {
                    on_stop(t, &y, end_density);
                }
                stop_idx += 1;
            }
        } else {
            stats.rejections += 1;
            h = step * (lit(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
        }
    }
    Ok((y, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let control = StepControl::with_tolerance(1e-12);
        let mut stats = IntegratorStats::default();
        let stops: Vec<f64> = (1..=10).map(|j| j as f64 * 0.5).collect();
        let mut seen = Vec::new();
        let (y, _) = integrate(
            |_, y: &[f64; 1]| Ok(([-y[0]], 1.0)),
            0.0,
            5.0,
            [1.0],
            0.1,
            &control,
            &stops,
            |t, y, _| seen.push((t, y[0])),
            &mut stats,
        )
        .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
        assert_eq!(seen.len(), 10);
        for (t, v) in seen {
            assert!((v - (-t).exp()).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_energy() {
        let control = StepControl::with_tolerance(1e-10);
        let mut stats = IntegratorStats::default();
        let (y, _) = integrate(
            |_, y: &[f64; 2]| Ok(([y[1], -y[0]], 1.0)),
            0.0,
            20.0,
            [1.0, 0.0],
            0.1,
            &control,
            &[],
            |_, _, _| {},
            &mut stats,
        )
        .unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-8);
        assert!((y[1] + 20f64.sin()).abs() < 1e-8);
        assert!(stats.steps > 10);
    }

    #[test]
    fn node_guard_gives_up() {
        let control = StepControl::with_tolerance(1e-9);
        let mut stats = IntegratorStats::default();
        // Field refuses to evaluate anywhere past y = 0.5.
        let res = integrate(
            |t, y: &[f64; 1]| {
                if y[0] > 0.5 {
                    Err(NodeEvent { time: t, angle: y[0], density: 0.0 })
                } else {
                    Ok(([1.0], 1.0))
                }
            },
            0.0,
            2.0,
            [0.0],
            0.1,
            &control,
            &[],
            |_, _, _| {},
            &mut stats,
        );
        assert!(matches!(res, Err(Error::NodeProximity(_))));
        assert!(stats.node_halvings > 0);
    }
}
