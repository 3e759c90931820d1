//! Integer-order Bessel functions of the first kind, `J_s(x)` for `x ≥ 0`.
//!
//! Miller's backward recurrence `J_{n-1} = (2n/x) J_n - J_{n+1}` started well
//! above the highest requested order, normalized with the sum rule
//! `J_0 + 2 Σ_{m≥1} J_{2m} = 1`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `J_s(x)` for any integer order, using `J_{-s} = (-1)^s J_s`.
pub fn bessel_j<T: Real>(order: i64, x: T) -> Result<T> {
    let s = order.unsigned_abs() as usize;
    let table = bessel_j_table(s, x)?;
    let v = table[s];
    Ok(if order < 0 && s % 2 == 1 { -v } else { v })
}

/// `[J_0(x), J_1(x), …, J_max_order(x)]` from a single recurrence pass.
pub fn bessel_j_table<T: Real>(max_order: usize, x: T) -> Result<Vec<T>> {
    if !(x >= T::zero()) || !x.is_finite() {
        return Err(Error::NegativeArgument {
            what: "bessel_j",
            value: x.as_f64(),
        });
    }
    let mut out = vec![T::zero(); max_order + 1];
    if x == T::zero() {
        out[0] = T::one();
        return Ok(out);
    }

    let xf = x.as_f64();
    let top = (max_order as f64).max(xf);
    let mut start = (top + 20.0 + (40.0 * top.max(1.0)).sqrt()).ceil() as usize;
    start += start % 2;

    // Rescale before the recurrence leaves the representable range.
    let big = T::max_value().sqrt().sqrt();
    let two_over_x = T::lit(2.0) / x;

    let mut j_next = T::zero(); // J_{n+1}
    let mut j_cur = T::min_positive_value().sqrt().max(T::lit(1e-30)); // J_n, arbitrary seed
    let mut even_sum = T::zero();
    for n in (1..=start).rev() {
        // Invariant: j_cur ∝ J_n, j_next ∝ J_{n+1}.
        if n <= max_order {
            out[n] = j_cur;
        }
        if n % 2 == 0 {
            even_sum = even_sum + j_cur;
        }
        let j_prev = two_over_x * T::from_index(n as i64) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > big {
            let inv = big.recip();
            j_cur = j_cur * inv;
            j_next = j_next * inv;
            even_sum = even_sum * inv;
            for v in out.iter_mut().skip(n.saturating_sub(1)) {
                *v = *v * inv;
            }
        }
    }
    out[0] = j_cur;
    let norm = j_cur + T::lit(2.0) * even_sum;
    let inv = norm.recip();
    for v in &mut out {
        *v = *v * inv;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `J_n(x) = (1/2π) ∫_0^{2π} cos(nφ - x sin φ) dφ`, trapezoid rule on the
    /// periodic integrand (spectrally convergent).
    fn integral_oracle(n: i64, x: f64) -> f64 {
        let m = 1024;
        let h = std::f64::consts::TAU / m as f64;
        (0..m)
            .map(|j| {
                let phi = j as f64 * h;
                (n as f64 * phi - x * phi.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    /// Ascending power series, accurate for moderate arguments.
    fn series_oracle(n: u32, x: f64) -> f64 {
        let half = x / 2.0;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for m in 1..200 {
            term *= -half * half / (m as f64 * (m + n) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }

    #[test]
    fn trivial_values() {
        assert_eq!(bessel_j(0, 0.0f64).unwrap(), 1.0);
        assert_eq!(bessel_j(3, 0.0f64).unwrap(), 0.0);
        assert_eq!(bessel_j(-3, 0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn j0_of_ten_matches_oracles() {
        let series = series_oracle(0, 10.0);
        let quad = integral_oracle(0, 10.0);
        assert!((series - quad).abs() < 1e-12);
        // J_0(10) = -0.245935764451348...
        assert!((quad + 0.245_935_764_451_348).abs() < 1e-13);
        let v = bessel_j(0, 10.0f64).unwrap();
        assert!((v - quad).abs() < 1e-13, "{v} vs {quad}");
    }

    #[test]
    fn negative_argument_rejected() {
        assert!(matches!(
            bessel_j(1, -1.0f64),
            Err(Error::NegativeArgument { .. })
        ));
        assert!(bessel_j(1, f64::NAN).is_err());
    }

    #[test]
    fn accuracy_over_required_range() {
        for &x in &[0.1, 1.0, 2.5, 10.0, 17.3, 40.0, 100.0] {
            let max = (3.0 * x) as usize + 40;
            let table = bessel_j_table(max, x).unwrap();
            for (s, &v) in table.iter().enumerate() {
                let oracle = integral_oracle(s as i64, x);
                assert!(
                    (v - oracle).abs() < 1e-12,
                    "J_{s}({x}) = {v}, oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn tiny_argument() {
        let x = 1e-6;
        for s in 0..5u32 {
            let v = bessel_j(s as i64, x).unwrap();
            let e = series_oracle(s, x);
            assert!((v - e).abs() <= 1e-14 * e.abs().max(1e-300) + 1e-300, "J_{s}: {v} vs {e}");
        }
    }

    #[test]
    fn sum_rules_at_ten() {
        let t = bessel_j_table(80, 10.0f64).unwrap();
        let sq: f64 = t[0] * t[0] + 2.0 * t[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((sq - 1.0).abs() < 1e-14);
        let n2: f64 = 2.0 * t.iter().enumerate().map(|(n, v)| (n * n) as f64 * v * v).sum::<f64>();
        assert!((n2 - 50.0).abs() < 1e-11);
    }

    #[test]
    fn single_precision() {
        let v = bessel_j(0, 10.0f32).unwrap();
        assert!((v + 0.245_935_76).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn reflection_symmetry(s in 0i64..120, x in 0.0f64..60.0) {
            let p = bessel_j(s, x).unwrap();
            let m = bessel_j(-s, x).unwrap();
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(m, sign * p);
        }

        #[test]
        fn three_term_recurrence(s in 1i64..60, x in 0.5f64..50.0) {
            let lhs = bessel_j(s - 1, x).unwrap() + bessel_j(s + 1, x).unwrap();
            let rhs = 2.0 * s as f64 / x * bessel_j(s, x).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
        }
    }
}
