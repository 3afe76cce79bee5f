//! Special functions on the real line and in the right half plane.
//!
//! Everything that can grow is computed in the log domain and exponentiated
//! once at the end. Log-Gamma uses the Stirling series after shifting the
//! argument to `Re z >= 15`, which keeps the truncation error far below one
//! ulp of the result.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, Compensated};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_SHIFT: f64 = 15.0;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn stirling_real(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series * inv
}

fn stirling_complex(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    if x >= STIRLING_SHIFT {
        return stirling_real(x);
    }
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < STIRLING_SHIFT {
        prod *= shifted;
        shifted += 1.0;
    }
    stirling_real(shifted) - prod.ln()
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((ln_gamma(x), 1.0));
    }
    if x == x.floor() {
        return Err(Error::Pole(format!("Gamma has a pole at {x}")));
    }
    // reflection: Γ(x) Γ(1-x) = π / sin(πx)
    let s = (PI * x).sin();
    let sign = if s > 0.0 { 1.0 } else { -1.0 };
    Ok(((PI / s.abs()).ln() - ln_gamma(1.0 - x), sign))
}

/// Complex log-Gamma for `Re z > 0`.
///
/// The real part is `ln |Γ(z)|`. The imaginary part follows the continuous
/// branch from the real axis only up to a multiple of `2π`.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.re <= 0.0 {
        return Err(Error::arg(format!("ln_gamma_complex needs Re z > 0, got {z}")));
    }
    if z.re >= STIRLING_SHIFT {
        return Ok(stirling_complex(z));
    }
    let mut shifted = z;
    let mut prod = Complex64::new(1.0, 0.0);
    while shifted.re < STIRLING_SHIFT {
        prod *= shifted;
        shifted += 1.0;
    }
    Ok(stirling_complex(shifted) - prod.ln())
}

/// `ln B(a, b)` for positive arguments.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln n!`, summed exactly for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n <= 256 {
        compensated_sum((2..=n).map(|k| (k as f64).ln()))
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round_if_small()
}

trait RoundIfSmall {
    fn round_if_small(self) -> Self;
}

impl RoundIfSmall for f64 {
    fn round_if_small(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// Log-domain Pochhammer symbol: `(ln |(a)_n|, sign)`.
///
/// A vanishing symbol returns `(-inf, 0.0)`.
pub fn ln_pochhammer(a: f64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let last = a + (n - 1) as f64;
    if a <= 0.0 && a == a.floor() && last >= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if a > 0.0 {
        return (ln_rising_positive(a, n), 1.0);
    }
    // factors a, a+1, ... that are negative
    let negative = ((-a).ceil() as u64).min(n);
    // |a (a+1) ... (a+negative-1)| = (|a|-negative+1)_negative
    let neg_ln = ln_rising_positive(-a - (negative - 1) as f64, negative);
    let sign = if negative % 2 == 0 { 1.0 } else { -1.0 };
    let pos_ln = if negative < n {
        ln_rising_positive(a + negative as f64, n - negative)
    } else {
        0.0
    };
    (neg_ln + pos_ln, sign)
}

fn ln_rising_positive(a: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 256 {
        compensated_sum((0..n).map(|i| (a + i as f64).ln()))
    } else {
        ln_gamma(a + n as f64) - ln_gamma(a)
    }
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)`.
pub fn pochhammer(a: f64, n: u64) -> f64 {
    if n <= 32 {
        let mut acc = 1.0;
        for i in 0..n {
            acc *= a + i as f64;
        }
        return acc;
    }
    let (l, s) = ln_pochhammer(a, n);
    s * l.exp()
}

/// Terminating `2F1(-n, b; c; 1) = (c-b)_n / (c)_n` (Chu–Vandermonde).
pub fn gauss_2f1_unit(n: u64, b: f64, c: f64) -> Result<f64> {
    let (lc, sc) = ln_pochhammer(c, n);
    if sc == 0.0 {
        return Err(Error::Pole(format!(
            "2F1(-{n}, {b}; {c}; 1): (c)_j vanishes for some j <= {n}"
        )));
    }
    let (lnum, snum) = ln_pochhammer(c - b, n);
    if snum == 0.0 {
        return Ok(0.0);
    }
    Ok(snum * sc * (lnum - lc).exp())
}

/// `2F1(a, b; c; x)` by its power series, `|x| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::OutOfRange(format!("2F1 series needs |x| < 1, got {x}")));
    }
    let mut term = 1.0;
    let mut acc = Compensated::new();
    acc.add(1.0);
    for s in 0..10_000_000u64 {
        let sf = s as f64;
        if c + sf == 0.0 {
            return Err(Error::Pole(format!("2F1({a}, {b}; {c}; x)")));
        }
        term *= (a + sf) * (b + sf) / ((c + sf) * (sf + 1.0)) * x;
        acc.add(term);
        let next = (a + sf + 1.0) * (b + sf + 1.0) / ((c + sf + 1.0) * (sf + 2.0)) * x;
        if term == 0.0 || (term.abs() <= 1e-17 * acc.value().abs() && next.abs() < 1.0) {
            return Ok(acc.value());
        }
    }
    Err(Error::OutOfRange(format!("2F1 series did not converge at x = {x}")))
}

fn check_weight(w: f64) -> Result<()> {
    if !(w > 1.0) || !w.is_finite() {
        return Err(Error::InvalidWeight {
            weight: w,
            reason: "weights must be finite and exceed 1",
        });
    }
    Ok(())
}

/// `C²_{mu,nu,k} = (mu)_k (nu)_k / (k! (mu+nu+k-1)_k)`.
///
/// This is the reciprocal of `‖(z-w)^k‖²` in `H_mu ⊗ H_nu`.
pub fn channel_constant_sq(mu: f64, nu: f64, k: u64) -> Result<f64> {
    check_weight(mu)?;
    check_weight(nu)?;
    Ok(ln_channel_constant_sq(mu, nu, k).exp())
}

pub(crate) fn ln_channel_constant_sq(mu: f64, nu: f64, k: u64) -> f64 {
    ln_pochhammer(mu, k).0 + ln_pochhammer(nu, k).0 - ln_factorial(k) - ln_pochhammer(mu + nu + k as f64 - 1.0, k).0
}

// ln cosh x without overflow
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Berezin eigenvalue `b_nu(lambda) = |Γ(iλ + ν - 1/2)|² / (Γ(ν) Γ(ν-1))`.
///
/// Integer weights go through the finite product
/// `π/cosh(πλ) · Π_{k<ν} ((k-1/2)² + λ²)`, other weights through complex
/// log-Gamma.
pub fn berezin_eigenvalue(nu: f64, lambda: f64) -> Result<f64> {
    check_weight(nu)?;
    if nu == nu.floor() && nu < 1.0e7 {
        Ok(berezin_eigenvalue_product(nu as u64, lambda))
    } else {
        berezin_eigenvalue_gamma(nu, lambda)
    }
}

/// Product route for integer `nu >= 2`.
pub fn berezin_eigenvalue_product(nu: u64, lambda: f64) -> f64 {
    assert!(nu >= 2, "integer weight must be at least 2");
    // ((k-1/2)^2 + λ^2) / (k (k-1)) = 1 + (1/4 + λ^2) / (k (k-1))
    let q = 0.25 + lambda * lambda;
    let tail = compensated_sum((2..nu).map(|k| {
        let kf = k as f64;
        (q / (kf * (kf - 1.0))).ln_1p()
    }));
    (PI.ln() - ln_cosh(PI * lambda) + q.ln() + tail).exp()
}

/// Complex log-Gamma route, valid for any real `nu > 1`.
pub fn berezin_eigenvalue_gamma(nu: f64, lambda: f64) -> Result<f64> {
    check_weight(nu)?;
    let lg = ln_gamma_complex(Complex64::new(nu - 0.5, lambda))?;
    Ok((2.0 * lg.re - ln_gamma(nu) - ln_gamma(nu - 1.0)).exp())
}

/// Plancherel density `|c(λ)|^{-2} = (πλ/2) tanh(πλ/2)`.
pub fn plancherel_density(lambda: f64) -> f64 {
    let x = 0.5 * PI * lambda;
    x * x.tanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(0.5), PI.sqrt().ln(), max_relative = 1e-15);
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(10.0), (362880.0f64).ln(), max_relative = 1e-15);
        // Γ(1/3) = 2.678938534707747...
        assert_relative_eq!(
            ln_gamma(1.0 / 3.0),
            2.678_938_534_707_747_6f64.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(ln_gamma(171.0), ln_factorial(170), max_relative = 1e-15);
    }

    #[test]
    fn signed_gamma_on_negative_axis() {
        // Γ(-1/2) = -2 sqrt(π)
        let (l, s) = ln_gamma_signed(-0.5).unwrap();
        assert_eq!(s, -1.0);
        assert_relative_eq!(l, (2.0 * PI.sqrt()).ln(), max_relative = 1e-14);
        assert!(ln_gamma_signed(-3.0).is_err());
    }

    #[test]
    fn complex_gamma_matches_real_axis_and_modulus_identity() {
        for &x in &[0.3, 1.5, 7.25, 40.0] {
            let z = ln_gamma_complex(Complex64::new(x, 0.0)).unwrap();
            assert_relative_eq!(z.re, ln_gamma(x), max_relative = 1e-14, epsilon = 1e-15);
        }
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        for &y in &[0.0, 0.7, 3.0, 12.0] {
            let z = ln_gamma_complex(Complex64::new(0.5, y)).unwrap();
            assert_relative_eq!(
                2.0 * z.re,
                PI.ln() - ln_cosh(PI * y),
                max_relative = 1e-13,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn pochhammer_matches_products() {
        assert_eq!(pochhammer(3.0, 4), 3.0 * 4.0 * 5.0 * 6.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert_eq!(pochhammer(-2.5, 2), -2.5 * -1.5);
        let (l, s) = ln_pochhammer(-2.5, 5);
        let direct: f64 = (0..5).map(|i| -2.5 + i as f64).product();
        assert_eq!(s, direct.signum());
        assert_relative_eq!(l, direct.abs().ln(), max_relative = 1e-14);
        let (l, s) = ln_pochhammer(2.5, 1000);
        assert_eq!(s, 1.0);
        assert_relative_eq!(l, ln_gamma(1002.5) - ln_gamma(2.5), max_relative = 1e-14);
    }

    #[test]
    fn chu_vandermonde_against_direct_sum() {
        for n in 0..8u64 {
            for &(b, c) in &[(1.5, 3.0), (-4.0, 2.5), (0.25, -7.5), (-2.0, 6.0)] {
                let mut direct = 0.0;
                for j in 0..=n {
                    direct += pochhammer(-(n as f64), j) * pochhammer(b, j) / (pochhammer(c, j) * pochhammer(1.0, j));
                }
                let closed = gauss_2f1_unit(n, b, c).unwrap();
                assert_relative_eq!(closed, direct, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
        assert!(matches!(gauss_2f1_unit(3, 1.0, -1.0), Err(Error::Pole(_))));
        assert!(gauss_2f1_unit(3, 1.0, -3.0).is_ok());
    }

    #[test]
    fn channel_constant_small_case() {
        // ‖(z-w)‖² in H_2 ⊗ H_2 is 1/2 + 1/2
        assert_relative_eq!(channel_constant_sq(2.0, 2.0, 1).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(channel_constant_sq(3.0, 5.0, 0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(channel_constant_sq(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn berezin_eigenvalue_examples() {
        assert_relative_eq!(berezin_eigenvalue(2.0, 0.0).unwrap(), PI / 4.0, max_relative = 1e-15);
        assert!(berezin_eigenvalue(200.0, 2.0).unwrap() > 0.95);
        assert!(berezin_eigenvalue(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn ln_gamma_recurrence(x in 0.05f64..300.0) {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
        }

        #[test]
        fn two_routes_agree(nu in 2u64..50, lambda in -20.0f64..20.0) {
            let a = berezin_eigenvalue_product(nu, lambda);
            let b = berezin_eigenvalue_gamma(nu as f64, lambda).unwrap();
            prop_assert!(((a - b) / a).abs() <= 1e-12);
        }
    }
}
