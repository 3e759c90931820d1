//! Mode-space evolution of the kicked rotor.
//!
//! Between kicks every mode picks up the free phase `e^{-iħn²t/2I}`; a kick
//! multiplies `ψ` by `e^{ik cos θ}`, which in mode space is the convolution
//! with `i^s J_s(k)`. One period of the Floquet map is therefore
//!
//! ```text
//! a_n((N+1)T⁺) = Σ_r a_r(NT⁺) · i^{n-r} J_{n-r}(k) · e^{-i r² τ/2}
//! ```

use num_complex::Complex;

use crate::bessel::bessel_j_table;
use crate::error::{Error, Result};
use crate::rotor::{RotorParams, SpectralState};
use crate::scalar::Real;

/// Band management for the kick map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy<T> {
    /// Edge modes below this magnitude are dropped after a kick.
    pub trim_below: T,
    /// Modes above this magnitude count as populated when growing the band.
    pub populated_above: T,
    /// Extra modes added beyond `ceil(2k) + 10`.
    pub extra_growth: i64,
    /// Largest `|n|` the band may reach.
    pub band_cap: i64,
    /// Maximum allowed `|1 - Σ|a_n|²|` per kick.
    pub norm_tolerance: T,
}

impl<T: Real> Default for TruncationPolicy<T> {
    fn default() -> Self {
        Self {
            trim_below: T::lit(1e-14),
            populated_above: T::lit(1e-12),
            extra_growth: 10,
            band_cap: 4096,
            norm_tolerance: T::lit(1e-10),
        }
    }
}

impl<T: Real> TruncationPolicy<T> {
    pub fn with_band_cap(mut self, cap: i64) -> Self {
        self.band_cap = cap;
        self
    }
}

/// Result of one Floquet period.
#[derive(Debug, Clone, PartialEq)]
pub struct KickOutcome<T> {
    /// Post-kick state, renormalized.
    pub state: SpectralState<T>,
    /// `|1 - Σ|a_n|²|` before renormalization.
    pub norm_defect: T,
}

/// Precomputed kick kernel `i^s J_s(k)` for a fixed parameter set.
#[derive(Debug, Clone)]
pub struct Kicker<T> {
    params: RotorParams<T>,
    policy: TruncationPolicy<T>,
    /// `kernel[s + reach] = i^s J_s(k)` for `|s| ≤ reach`.
    kernel: Vec<Complex<T>>,
    reach: i64,
}

impl<T: Real> Kicker<T> {
    pub fn new(params: RotorParams<T>, policy: TruncationPolicy<T>) -> Result<Self> {
        let kf = params.k.as_f64();
        let max_order = (3.0 * kf).ceil() as usize + 40;
        let table = bessel_j_table(max_order, params.k)?;
        // Beyond this order |J_s(k)| is below round-off relative to unit amplitude.
        let cutoff = T::epsilon() * T::lit(1e-4);
        let reach = table
            .iter()
            .rposition(|v| v.abs() > cutoff)
            .unwrap_or(0) as i64;
        let i_pow = |s: i64| match s.rem_euclid(4) {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), -T::one()),
        };
        let kernel = (-reach..=reach)
            .map(|s| {
                let j = table[s.unsigned_abs() as usize];
                let j = if s < 0 && s % 2 != 0 { -j } else { j };
                i_pow(s) * j
            })
            .collect();
        Ok(Self {
            params,
            policy,
            kernel,
            reach,
        })
    }

    pub fn params(&self) -> &RotorParams<T> {
        &self.params
    }

    pub fn policy(&self) -> &TruncationPolicy<T> {
        &self.policy
    }

    /// Free evolution over one period followed by a kick.
    pub fn kick(&self, state: &SpectralState<T>) -> Result<KickOutcome<T>> {
        let pre = free_propagate(state, self.params.period, &self.params)?;
        let (lo, hi) = populated_range(&pre, self.policy.populated_above);
        let base_growth = (T::lit(2.0) * self.params.k).ceil().to_i64().unwrap_or(0)
            + self.policy.extra_growth;
        let cap = self.policy.band_cap.max(state.n_max()).max(-state.n_min());
        let mut growth = base_growth.max(1);
        loop {
            let n_min = (lo - growth).max(-cap).min(0);
            let n_max = (hi + growth).min(cap).max(0);
            let coeffs = self.convolve(&pre, n_min, n_max);
            let norm: T = coeffs.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr());
            let defect = (T::one() - norm).abs();
            if defect <= self.policy.norm_tolerance {
                let (n_min, coeffs) = trim_edges(n_min, coeffs, self.policy.trim_below);
                let inv = norm.sqrt().recip();
                let coeffs = coeffs.into_iter().map(|a| a * inv).collect();
                let state = SpectralState::with_band(
                    n_min,
                    coeffs,
                    pre.time,
                    state.kicks_applied + 1,
                );
                return Ok(KickOutcome {
                    state,
                    norm_defect: defect,
                });
            }
            let at_cap = n_min == -cap && n_max == cap;
            if at_cap {
                return Err(Error::TruncationFailure {
                    kick: state.kicks_applied + 1,
                    defect: defect.as_f64(),
                    n_min,
                    n_max,
                });
            }
            growth *= 2;
        }
    }

    fn convolve(&self, pre: &SpectralState<T>, n_min: i64, n_max: i64) -> Vec<Complex<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let src_min = pre.n_min();
        let src_max = pre.n_max();
        let src = pre.coeffs();
        (n_min..=n_max)
            .map(|n| {
                let r_lo = (n - self.reach).max(src_min);
                let r_hi = (n + self.reach).min(src_max);
                let mut acc = zero;
                for r in r_lo..=r_hi {
                    let a = src[(r - src_min) as usize];
                    acc = acc + a * self.kernel[(n - r + self.reach) as usize];
                }
                acc
            })
            .collect()
    }
}

/// Outermost modes with `|a_n|` above `threshold`, always spanning 0.
fn populated_range<T: Real>(state: &SpectralState<T>, threshold: T) -> (i64, i64) {
    let mut lo = 0;
    let mut hi = 0;
    for (n, a) in state.modes() {
        if a.norm() > threshold {
            lo = lo.min(n);
            hi = hi.max(n);
        }
    }
    (lo, hi)
}

fn trim_edges<T: Real>(n_min: i64, mut coeffs: Vec<Complex<T>>, below: T) -> (i64, Vec<Complex<T>>) {
    let zero_idx = (-n_min) as usize;
    let last_keep = coeffs
        .iter()
        .rposition(|a| a.norm() >= below)
        .unwrap_or(0)
        .max(zero_idx);
    coeffs.truncate(last_keep + 1);
    let first_keep = coeffs
        .iter()
        .position(|a| a.norm() >= below)
        .unwrap_or(zero_idx)
        .min(zero_idx);
    coeffs.drain(..first_keep);
    (n_min + first_keep as i64, coeffs)
}

/// One period of free evolution followed by a kick, with a fresh kernel.
///
/// Prefer [`Kicker`] when kicking repeatedly.
pub fn apply_kick<T: Real>(
    state: &SpectralState<T>,
    params: &RotorParams<T>,
    policy: &TruncationPolicy<T>,
) -> Result<KickOutcome<T>> {
    Kicker::new(*params, *policy)?.kick(state)
}

/// Exact free-rotor evolution `a_n ↦ a_n e^{-iħn²dt/2I}`.
pub fn free_propagate<T: Real>(
    state: &SpectralState<T>,
    dt: T,
    params: &RotorParams<T>,
) -> Result<SpectralState<T>> {
    if !(dt >= T::zero()) || !dt.is_finite() {
        return Err(Error::NegativeArgument {
            what: "free_propagate",
            value: dt.as_f64(),
        });
    }
    let rate = params.free_phase_rate() * dt;
    let coeffs = state
        .modes()
        .map(|(n, a)| {
            let n2 = T::from_index(n * n);
            a * Complex::from_polar(T::one(), -(n2 * rate))
        })
        .collect();
    Ok(SpectralState::with_band(
        state.n_min(),
        coeffs,
        state.time + dt,
        state.kicks_applied,
    ))
}

/// `ψ` and its first three angular derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSample<T> {
    pub psi: Complex<T>,
    pub d1: Complex<T>,
    pub d2: Complex<T>,
    pub d3: Complex<T>,
    pub density: T,
}

impl<T: Real> PsiSample<T> {
    /// `Im(ψ* ∂ψ) / |ψ|²`, i.e. `(∂S/∂θ)/ħ`.
    #[inline]
    pub fn phase_gradient(&self) -> T {
        (self.psi.conj() * self.d1).im / self.density
    }

    /// `(∂ρ, ∂²ρ, ∂³ρ)` for `ρ = |ψ|²`.
    pub fn density_derivatives(&self) -> (T, T, T) {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let r1 = two * (self.psi.conj() * self.d1).re;
        let r2 = two * (self.d1.norm_sqr() + (self.psi.conj() * self.d2).re);
        let r3 = two * (three * (self.d1.conj() * self.d2).re + (self.psi.conj() * self.d3).re);
        (r1, r2, r3)
    }
}

/// Evaluate `ψ(θ, t0 + dt)` for a state held at `t0`, applying the free phases
/// for `dt` on the fly.
pub fn sample_state<T: Real>(state: &SpectralState<T>, params: &RotorParams<T>, theta: T, dt: T) -> PsiSample<T> {
    let [psi, d1, d2, d3] = accumulate::<T, 4>(state, params, theta, dt);
    PsiSample {
        psi,
        d1,
        d2,
        d3,
        density: psi.norm_sqr(),
    }
}

/// `(ψ, ∂ψ/∂θ)` only; the hot path of velocity-law integration.
pub fn sample_first_order<T: Real>(state: &SpectralState<T>, params: &RotorParams<T>, theta: T, dt: T) -> (Complex<T>, Complex<T>) {
    let [psi, d1] = accumulate::<T, 2>(state, params, theta, dt);
    (psi, d1)
}

/// Sums `(2π)^{-1/2} Σ (in)^m a_n e^{iφ_n}` for `m < ORDERS`, with
/// `φ_n = nθ - n²·rate·dt`.
///
/// Consecutive factors `e^{iφ_n}` follow from two complex products; both are
/// re-anchored with an exact `sin_cos` every `ANCHOR` modes so round-off does
/// not accumulate across wide bands. The band is split into `LANES`
/// contiguous runs walked in lockstep, which keeps the recurrences
/// independent and lets the compiler vectorize across runs.
fn accumulate<T: Real, const ORDERS: usize>(
    state: &SpectralState<T>,
    params: &RotorParams<T>,
    theta: T,
    dt: T,
) -> [Complex<T>; ORDERS] {
    const ANCHOR: usize = 256;
    const LANES: usize = 8;
    let rate = params.free_phase_rate() * dt;
    let two = T::lit(2.0);
    let chirp = Complex::from_polar(T::one(), -(two * rate));
    let (cr, ci) = (chirp.re, chirp.im);
    let coeffs = state.coeffs();
    let n_min = state.n_min();
    let m = coeffs.len();
    let lane_len = m / LANES;

    let anchor = |idx: usize| {
        let n = n_min + idx as i64;
        let nf = T::from_index(n);
        (
            Complex::from_polar(T::one(), nf * theta - T::from_index(n * n) * rate),
            Complex::from_polar(T::one(), theta - (two * nf + T::one()) * rate),
            nf,
        )
    };

    let zero = T::zero();
    // Accumulators: [order][re/im][lane].
    let mut acc = [[[zero; LANES]; 2]; ORDERS];
    let (mut zr, mut zi, mut wr, mut wi, mut nf) =
        ([zero; LANES], [zero; LANES], [zero; LANES], [zero; LANES], [zero; LANES]);
    let mut block = 0;
    while block < lane_len {
        let stop = (block + ANCHOR).min(lane_len);
        for l in 0..LANES {
            let (z, w, n) = anchor(l * lane_len + block);
            (zr[l], zi[l], wr[l], wi[l], nf[l]) = (z.re, z.im, w.re, w.im, n);
        }
        for j in block..stop {
            let mut ar = [zero; LANES];
            let mut ai = [zero; LANES];
            for l in 0..LANES {
                let c = coeffs[l * lane_len + j];
                ar[l] = c.re;
                ai[l] = c.im;
            }
            for l in 0..LANES {
                let tr = ar[l] * zr[l] - ai[l] * zi[l];
                let ti = ar[l] * zi[l] + ai[l] * zr[l];
                let n = nf[l];
                acc[0][0][l] = acc[0][0][l] + tr;
                acc[0][1][l] = acc[0][1][l] + ti;
                if ORDERS > 1 {
                    // (in)^m factors
                    acc[1][0][l] = acc[1][0][l] - ti * n;
                    acc[1][1][l] = acc[1][1][l] + tr * n;
                }
                if ORDERS > 2 {
                    let n2 = n * n;
                    acc[2][0][l] = acc[2][0][l] - tr * n2;
                    acc[2][1][l] = acc[2][1][l] - ti * n2;
                }
                if ORDERS > 3 {
                    let n3 = n * n * n;
                    acc[3][0][l] = acc[3][0][l] + ti * n3;
                    acc[3][1][l] = acc[3][1][l] - tr * n3;
                }
                let (z_r, z_i) = (zr[l] * wr[l] - zi[l] * wi[l], zr[l] * wi[l] + zi[l] * wr[l]);
                let (w_r, w_i) = (wr[l] * cr - wi[l] * ci, wr[l] * ci + wi[l] * cr);
                (zr[l], zi[l], wr[l], wi[l]) = (z_r, z_i, w_r, w_i);
                nf[l] = n + T::one();
            }
        }
        block = stop;
    }

    let mut out = [Complex::new(zero, zero); ORDERS];
    for (o, a) in out.iter_mut().zip(&acc) {
        for (&re, &im) in a[0].iter().zip(&a[1]) {
            *o = *o + Complex::new(re, im);
        }
    }
    // Leftover modes past the last full lane.
    let mut idx = LANES * lane_len;
    while idx < m {
        let (mut z, w0, mut n) = anchor(idx);
        let mut w = w0;
        let stop = (idx + ANCHOR).min(m);
        for c in &coeffs[idx..stop] {
            let term = *c * z;
            out[0] = out[0] + term;
            let mut f = term;
            for o in out.iter_mut().skip(1) {
                f = Complex::new(-f.im, f.re) * n;
                *o = *o + f;
            }
            z = z * w;
            w = w * chirp;
            n = n + T::one();
        }
        idx = stop;
    }
    let scale = T::TAU().sqrt().recip();
    out.map(|v| v * scale)
}

/// Post-kick states `a_n(NT⁺)` for `N = 0..=n_kicks`.
#[derive(Debug, Clone)]
pub struct EvolutionTimeline<T> {
    params: RotorParams<T>,
    epochs: Vec<SpectralState<T>>,
    norm_history: Vec<T>,
}

impl<T: Real> EvolutionTimeline<T> {
    /// Kick `initial` (taken to be the state at `t = 0`) `n_kicks` times.
    pub fn build(
        params: RotorParams<T>,
        initial: SpectralState<T>,
        n_kicks: usize,
        policy: TruncationPolicy<T>,
    ) -> Result<Self> {
        let kicker = Kicker::new(params, policy)?;
        let mut state = initial.normalized()?;
        state.time = T::zero();
        state.kicks_applied = 0;
        let mut epochs = Vec::with_capacity(n_kicks + 1);
        let mut norm_history = Vec::with_capacity(n_kicks);
        epochs.push(state);
        for _ in 0..n_kicks {
            let out = kicker.kick(epochs.last().expect("non-empty"))?;
            norm_history.push(out.norm_defect);
            let mut next = out.state;
            // Keep epoch times on the exact grid rather than accumulating sums.
            next.time = T::from_index(next.kicks_applied as i64) * params.period;
            epochs.push(next);
        }
        Ok(Self {
            params,
            epochs,
            norm_history,
        })
    }

    /// Timeline covering at least `[0, t_max]`.
    pub fn build_until(
        params: RotorParams<T>,
        initial: SpectralState<T>,
        t_max: T,
        policy: TruncationPolicy<T>,
    ) -> Result<Self> {
        if !(t_max >= T::zero()) || !t_max.is_finite() {
            return Err(Error::NegativeArgument {
                what: "timeline horizon",
                value: t_max.as_f64(),
            });
        }
        let n = (t_max / params.period).ceil().to_usize().unwrap_or(0);
        Self::build(params, initial, n, policy)
    }

    pub fn params(&self) -> &RotorParams<T> {
        &self.params
    }

    pub fn epochs(&self) -> &[SpectralState<T>] {
        &self.epochs
    }

    /// Norm defect recorded at each kick (`norm_history[N-1]` for kick `N`).
    pub fn norm_history(&self) -> &[T] {
        &self.norm_history
    }

    pub fn n_kicks(&self) -> usize {
        self.epochs.len() - 1
    }

    pub fn horizon(&self) -> T {
        T::from_index(self.n_kicks() as i64) * self.params.period
    }

    /// Index of the epoch governing time `t` (the post-kick one at kick instants).
    pub fn epoch_index(&self, t: T) -> Result<usize> {
        let horizon = self.horizon();
        let slack = T::epsilon() * T::lit(16.0) * horizon.max(T::one());
        if !(t >= -slack) || t > horizon + slack {
            return Err(Error::Horizon {
                t: t.as_f64(),
                horizon: horizon.as_f64(),
            });
        }
        let n = (t / self.params.period).floor().to_i64().unwrap_or(0);
        Ok(n.clamp(0, self.n_kicks() as i64) as usize)
    }

    /// `ψ` at `(θ, t)` using the epoch with `NT ≤ t`.
    pub fn evaluate_psi(&self, theta: T, t: T) -> Result<PsiSample<T>> {
        let n = self.epoch_index(t)?;
        Ok(self.evaluate_in_epoch(n, theta, t))
    }

    /// `ψ` at `(θ, t)` propagated freely from epoch `n`; `t` may lie anywhere
    /// in `[nT, (n+1)T]`, which gives access to `NT⁻` values.
    pub fn evaluate_in_epoch(&self, n: usize, theta: T, t: T) -> PsiSample<T> {
        let epoch = &self.epochs[n];
        sample_state(epoch, &self.params, theta, t - epoch.time)
    }

    /// `(ψ, ∂ψ/∂θ)` at `(θ, t)` propagated freely from epoch `n`.
    pub fn first_order_in_epoch(&self, n: usize, theta: T, t: T) -> (Complex<T>, Complex<T>) {
        let epoch = &self.epochs[n];
        sample_first_order(epoch, &self.params, theta, t - epoch.time)
    }

    /// The state at time `t` (post-kick at kick instants).
    pub fn state_at(&self, t: T) -> Result<SpectralState<T>> {
        let n = self.epoch_index(t)?;
        let epoch = &self.epochs[n];
        free_propagate(epoch, (t - epoch.time).max(T::zero()), &self.params)
    }
}
