//! Rotor parameters, angle bookkeeping and initial-state constructors.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Extra modes kept beyond the outermost populated mode by every constructor.
pub const BAND_MARGIN: i64 = 8;

/// Physical constants of the kicked rotor together with the dimensionless
/// combinations that govern the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorParams<T> {
    pub hbar: T,
    pub inertia: T,
    pub omega0: T,
    pub period: T,
    /// Dimensionless kick strength `I ω0² T / ħ`.
    pub k: T,
    /// Effective Planck constant `ħ T / I`.
    pub tau: T,
    /// Classical stochasticity parameter, stored as `k * tau`.
    pub big_k: T,
}

impl<T: Real> RotorParams<T> {
    pub fn new(hbar: T, inertia: T, omega0: T, period: T) -> Result<Self> {
        positive("hbar", hbar)?;
        positive("inertia", inertia)?;
        positive("period", period)?;
        if !(omega0 >= T::zero()) || !omega0.is_finite() {
            return Err(Error::ParameterDomain {
                name: "omega0",
                value: omega0.as_f64(),
                requirement: "must be finite and >= 0",
            });
        }
        let k = inertia * omega0 * omega0 * period / hbar;
        let tau = hbar * period / inertia;
        Ok(Self {
            hbar,
            inertia,
            omega0,
            period,
            k,
            tau,
            big_k: k * tau,
        })
    }

    /// Parameters in units `ħ = I = 1` from the dimensionless pair `(k, τ)`.
    pub fn from_dimensionless(k: T, tau: T) -> Result<Self> {
        positive("tau", tau)?;
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::ParameterDomain {
                name: "k",
                value: k.as_f64(),
                requirement: "must be finite and >= 0",
            });
        }
        // With ħ = I = 1: T = τ and ω0² = k / τ. The pair is kept exact.
        let mut p = Self::new(T::one(), T::one(), (k / tau).sqrt(), tau)?;
        p.k = k;
        p.tau = tau;
        p.big_k = k * tau;
        Ok(p)
    }

    /// `ħ / 2I`, the coefficient of `n²` in the free-rotor phase rate.
    #[inline]
    pub fn free_phase_rate(&self) -> T {
        self.hbar / (T::lit(2.0) * self.inertia)
    }

    /// Conversion factor from dimensionless map momentum to `p_θ`.
    #[inline]
    pub fn momentum_scale(&self) -> T {
        self.inertia / self.period
    }

    /// Conversion factor from the dimensionless map energy `p̃²/2` to physical energy.
    #[inline]
    pub fn energy_scale(&self) -> T {
        self.inertia / (self.period * self.period)
    }
}

fn positive<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name,
            value: value.as_f64(),
            requirement: "must be finite and > 0",
        })
    }
}

/// Wrap an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::TAU();
    let mut w = theta % two_pi;
    if w < T::zero() {
        w = w + two_pi;
    }
    // `-tiny + 2π` rounds to exactly 2π.
    if w >= two_pi {
        w = w - two_pi;
    }
    w
}

/// Orientation of the rotor, carried both on the circle and on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle<T> {
    pub wrapped: T,
    pub unwrapped: T,
}

impl<T: Real> Angle<T> {
    pub fn from_unwrapped(unwrapped: T) -> Self {
        Self {
            wrapped: wrap_angle(unwrapped),
            unwrapped,
        }
    }

    pub fn from_degrees(deg: T) -> Self {
        Self::from_unwrapped(deg.to_radians())
    }
}

/// Banded free-rotor expansion `ψ(θ) = (2π)^{-1/2} Σ a_n e^{inθ}` over
/// `n ∈ [n_min, n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<T> {
    n_min: i64,
    coeffs: Vec<Complex<T>>,
    pub time: T,
    pub kicks_applied: usize,
}

impl<T: Real> SpectralState<T> {
    /// Build a state from raw coefficients starting at mode `n_min`.
    ///
    /// The band must contain mode 0. Coefficients are stored as given; use
    /// [`SpectralState::normalized`] to rescale.
    pub fn from_coeffs(n_min: i64, coeffs: Vec<Complex<T>>) -> Result<Self> {
        let n_max = n_min + coeffs.len() as i64 - 1;
        if coeffs.is_empty() || n_min > 0 || n_max < 0 {
            return Err(Error::DegenerateState("band must be non-empty and contain mode 0"));
        }
        Ok(Self {
            n_min,
            coeffs,
            time: T::zero(),
            kicks_applied: 0,
        })
    }

    pub(crate) fn with_band(n_min: i64, coeffs: Vec<Complex<T>>, time: T, kicks_applied: usize) -> Self {
        debug_assert!(n_min <= 0 && n_min + coeffs.len() as i64 > 0);
        Self {
            n_min,
            coeffs,
            time,
            kicks_applied,
        }
    }

    #[inline]
    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    #[inline]
    pub fn n_max(&self) -> i64 {
        self.n_min + self.coeffs.len() as i64 - 1
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// `(n, a_n)` pairs over the band.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &a)| (self.n_min + j as i64, a))
    }

    /// Coefficient of mode `n`, zero outside the band.
    pub fn coeff(&self, n: i64) -> Complex<T> {
        if n < self.n_min || n > self.n_max() {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coeffs[(n - self.n_min) as usize]
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// The same state rescaled to unit norm.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateState("state has zero norm"));
        }
        let inv = norm.recip();
        for a in &mut self.coeffs {
            *a = *a * inv;
        }
        Ok(self)
    }

    /// Same coefficients with every amplitude multiplied by `phase`.
    pub fn with_global_phase(mut self, phase: Complex<T>) -> Self {
        for a in &mut self.coeffs {
            *a = *a * phase;
        }
        self
    }
}

fn real_coeffs<T: Real>(n_min: i64, n_max: i64, f: impl Fn(i64) -> T) -> Vec<Complex<T>> {
    (n_min..=n_max).map(|n| Complex::new(f(n), T::zero())).collect()
}

/// Free-rotor eigenstate `a_{n0} = 1`.
pub fn make_eigenstate<T: Real>(n0: i64) -> SpectralState<T> {
    let n_min = n0.min(0) - BAND_MARGIN;
    let n_max = n0.max(0) + BAND_MARGIN;
    let coeffs = real_coeffs(n_min, n_max, |n| if n == n0 { T::one() } else { T::zero() });
    SpectralState::with_band(n_min, coeffs, T::zero(), 0)
}

/// Normalized `a_0 : a_1 : a_{-1} = 1 : a : a`, i.e. `ψ ∝ 1 + 2a cos θ` at `t = 0`.
pub fn make_cosine_superposition<T: Real>(a: T) -> SpectralState<T> {
    let n_max = 1 + BAND_MARGIN;
    let coeffs = real_coeffs(-n_max, n_max, |n| match n {
        0 => T::one(),
        1 | -1 => a,
        _ => T::zero(),
    });
    SpectralState::with_band(-n_max, coeffs, T::zero(), 0)
        .normalized()
        .expect("1 + 2a cos θ never vanishes identically")
}

/// Normalized two-mode state with amplitudes proportional to `(a0, a1)` on modes 0 and 1.
pub fn make_two_mode<T: Real>(a0: T, a1: T) -> Result<SpectralState<T>> {
    if a0 == T::zero() && a1 == T::zero() {
        return Err(Error::DegenerateState("two-mode amplitudes are both zero"));
    }
    let n_max = 1 + BAND_MARGIN;
    let coeffs = real_coeffs(-BAND_MARGIN, n_max, |n| match n {
        0 => a0,
        1 => a1,
        _ => T::zero(),
    });
    SpectralState::with_band(-BAND_MARGIN, coeffs, T::zero(), 0).normalized()
}

/// Gaussian wavepacket in momentum space centred on `p_mean` with standard
/// deviation `p_halfwidth` of `|a_n|²`, translated to `theta_center`.
pub fn make_gaussian_packet<T: Real>(
    p_mean: T,
    p_halfwidth: T,
    theta_center: T,
) -> Result<SpectralState<T>> {
    if !(p_halfwidth > T::zero()) || !p_halfwidth.is_finite() || !p_mean.is_finite() {
        return Err(Error::ParameterDomain {
            name: "p_halfwidth",
            value: p_halfwidth.as_f64(),
            requirement: "must be finite and > 0",
        });
    }
    // exp(-x²/4σ²) < 1e-20 beyond |x| = 2σ·sqrt(20 ln 10) ≈ 13.6σ.
    let reach = (T::lit(13.6) * p_halfwidth).ceil().to_i64().unwrap_or(0) + 1;
    let centre = p_mean.round().to_i64().unwrap_or(0);
    let lo = (centre - reach).min(0) - BAND_MARGIN;
    let hi = (centre + reach).max(0) + BAND_MARGIN;
    let four_var = T::lit(4.0) * p_halfwidth * p_halfwidth;
    let coeffs = (lo..=hi)
        .map(|n| {
            let nf = T::from_index(n);
            let d = nf - p_mean;
            let amp = (-(d * d) / four_var).exp();
            Complex::from_polar(amp, -nf * theta_center)
        })
        .collect();
    SpectralState::with_band(lo, coeffs, T::zero(), 0).normalized()
}
