//! The equivariant channel `T(A) = P_k (A ⊗ I) P_k*` from `H_mu` to
//! `H_{mu+nu+2k}`.
//!
//! `P_k(z^m w^n) = c_{m,n} ζ^{m+n-k}` with
//! `c_{m,n} = C Σ_j (-1)^j C(k,j) m!/(m-j)! n!/(n-k+j)! / ((mu)_j (nu)_{k-j})`.
//! Everything here works with the orthonormal version
//! `γ_{m,n} = c_{m,n} sqrt(w_mu(m) w_nu(n) / w_sigma(p))`, `w_a(i) = (a)_i/i!`,
//! so that `P_k* ê_p = Σ_{m+n=p+k} γ_{m,n} ê_m ⊗ ê_n`. Grades are conserved,
//! which makes every entry of `T(A)` a finite sum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bergman::{check_weight, ln_weight_table, TruncatedOperator};
use crate::error::{Error, Result};
use crate::specfun::{binomial, ln_channel_constant_sq, ln_factorial, ln_pochhammer};
use crate::sum::{compensated_sum, Compensated};

/// Spectrum points may leave `[0, 1]` by this much before being rejected.
pub const SPECTRUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    pub mu: f64,
    pub nu: f64,
    pub k: usize,
    /// Output truncation `L`.
    pub output_degree: usize,
}

/// `max(4 (nu + k), 512)`.
pub fn default_output_degree(nu: f64, k: usize) -> usize {
    ((4.0 * (nu + k as f64)).ceil() as usize).max(512)
}

impl ChannelParams {
    pub fn new(mu: f64, nu: f64, k: usize, output_degree: usize) -> Result<Self> {
        check_weight(mu)?;
        check_weight(nu)?;
        Ok(Self {
            mu,
            nu,
            k,
            output_degree,
        })
    }

    pub fn with_default_degree(mu: f64, nu: f64, k: usize) -> Result<Self> {
        Self::new(mu, nu, k, default_output_degree(nu, k))
    }

    /// Output weight `mu + nu + 2k`.
    pub fn sigma(&self) -> f64 {
        self.mu + self.nu + 2.0 * self.k as f64
    }

    /// Exact trace ratio `Tr T(A) / Tr A = (mu+nu+2k-1)/(mu-1)`.
    pub fn trace_ratio(&self) -> f64 {
        (self.sigma() - 1.0) / (self.mu - 1.0)
    }
}

/// Coefficient tables for grades `0..=max_grade` of the output space.
#[derive(Debug, Clone)]
pub struct ProjectionCoefficients {
    params: ChannelParams,
    max_grade: usize,
    ln_c: f64,
    lw_mu: Vec<f64>,
    lw_nu: Vec<f64>,
    lw_sigma: Vec<f64>,
    // per j: ln C(k,j) - ln (mu)_j - ln (nu)_{k-j}
    ln_j: Vec<f64>,
}

pub fn projection_coefficients(params: &ChannelParams, max_grade: usize) -> ProjectionCoefficients {
    let k = params.k;
    let top = max_grade + k + 1;
    let ln_j = (0..=k)
        .map(|j| {
            binomial(k as u64, j as u64).ln()
                - ln_pochhammer(params.mu, j as u64).0
                - ln_pochhammer(params.nu, (k - j) as u64).0
        })
        .collect();
    ProjectionCoefficients {
        params: *params,
        max_grade,
        ln_c: 0.5 * ln_channel_constant_sq(params.mu, params.nu, k as u64),
        lw_mu: ln_weight_table(params.mu, top),
        lw_nu: ln_weight_table(params.nu, top),
        lw_sigma: ln_weight_table(params.sigma(), max_grade + 1),
        ln_j,
    }
}

fn ln_falling(x: usize, j: usize) -> f64 {
    (0..j).map(|i| ((x - i) as f64).ln()).sum()
}

impl ProjectionCoefficients {
    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn max_grade(&self) -> usize {
        self.max_grade
    }

    fn terms(&self, m: usize, n: usize, extra: f64) -> f64 {
        let k = self.params.k;
        let mut acc = Compensated::new();
        for j in 0..=k {
            if j > m || k - j > n {
                continue;
            }
            let l = self.ln_c + self.ln_j[j] + ln_falling(m, j) + ln_falling(n, k - j) + extra;
            let t = l.exp();
            acc.add(if j % 2 == 0 { t } else { -t });
        }
        acc.value()
    }

    fn check(&self, m: usize, n: usize) -> Option<usize> {
        let k = self.params.k;
        if m + n < k {
            return None;
        }
        let p = m + n - k;
        assert!(p <= self.max_grade, "grade {p} beyond table size {}", self.max_grade);
        Some(p)
    }

    /// `c_{m,n}` in the monomial bases.
    pub fn monomial(&self, m: usize, n: usize) -> f64 {
        match self.check(m, n) {
            None => 0.0,
            Some(_) => self.terms(m, n, 0.0),
        }
    }

    /// `γ_{m,n}` in the orthonormal bases.
    pub fn orthonormal(&self, m: usize, n: usize) -> f64 {
        match self.check(m, n) {
            None => 0.0,
            Some(p) => self.terms(m, n, 0.5 * (self.lw_mu[m] + self.lw_nu[n] - self.lw_sigma[p])),
        }
    }

    /// `(m, n, γ_{m,n})` for all `m + n = p + k`.
    pub fn grade(&self, p: usize) -> Vec<(usize, usize, f64)> {
        let g = p + self.params.k;
        (0..=g).map(|m| (m, g - m, self.orthonormal(m, g - m))).collect()
    }

    /// `w_a(i) = (a)_i / i!` for the three weights, as logs.
    pub(crate) fn ln_weights(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.lw_mu, &self.lw_nu, &self.lw_sigma)
    }
}

/// `P_k* ζ^p` in the monomial basis: `(m, n, coefficient of z^m w^n)`.
pub fn pk_star_vector(params: &ChannelParams, p: usize) -> Vec<(usize, usize, f64)> {
    let pc = projection_coefficients(params, p);
    let g = p + params.k;
    let (lmu, lnu, lsig) = pc.ln_weights();
    (0..=g)
        .map(|m| {
            let n = g - m;
            // c_{m,n} ‖ζ^p‖² / (‖z^m‖² ‖w^n‖²)
            let scale = (lmu[m] + lnu[n] - lsig[p]).exp();
            (m, n, pc.monomial(m, n) * scale)
        })
        .collect()
}

/// `max_p |Σ_{m+n=p+k} γ_{m,n}² - 1|` over grades `0..=max_grade`.
pub fn isometry_defect(params: &ChannelParams, max_grade: usize) -> f64 {
    let pc = projection_coefficients(params, max_grade);
    (0..=max_grade)
        .map(|p| (compensated_sum(pc.grade(p).iter().map(|t| t.2 * t.2)) - 1.0).abs())
        .fold(0.0, f64::max)
}

// γ(p, m) for m = 0..=min(N, p+k), indexed [p][m]
fn gamma_table(pc: &ProjectionCoefficients, input_degree: usize) -> Vec<Vec<f64>> {
    let k = pc.params.k;
    (0..=pc.max_grade)
        .into_par_iter()
        .map(|p| {
            (0..=input_degree.min(p + k))
                .map(|m| pc.orthonormal(m, p + k - m))
                .collect()
        })
        .collect()
}

fn check_input(a: &TruncatedOperator, params: &ChannelParams) -> Result<()> {
    if (a.nu - params.mu).abs() > 1e-12 {
        return Err(Error::arg(format!(
            "input lives on H_{} but the channel expects H_{}",
            a.nu, params.mu
        )));
    }
    Ok(())
}

/// Band-limited operator on degrees `0..=L`: row `p` holds columns
/// `p - w ..= p + w` clipped to `0..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedOperator {
    pub nu: f64,
    pub half_width: usize,
    pub rows: Vec<Vec<Complex64>>,
}

impl BandedOperator {
    pub fn degree(&self) -> usize {
        self.rows.len() - 1
    }

    fn first_col(&self, p: usize) -> usize {
        p.saturating_sub(self.half_width)
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        let lo = self.first_col(p);
        if q < lo {
            return Complex64::new(0.0, 0.0);
        }
        self.rows[p].get(q - lo).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn trace(&self) -> f64 {
        compensated_sum((0..self.rows.len()).map(|p| self.get(p, p).re))
    }

    fn mul(&self, other: &BandedOperator) -> BandedOperator {
        let l = self.degree();
        let w = self.half_width + other.half_width;
        let rows = (0..=l)
            .into_par_iter()
            .map(|p| {
                let lo = p.saturating_sub(w);
                let mut out = vec![Complex64::new(0.0, 0.0); (p + w).min(l) - lo + 1];
                let r_lo = self.first_col(p);
                for (dr, x) in self.rows[p].iter().enumerate() {
                    let r = r_lo + dr;
                    let q_lo = other.first_col(r);
                    for (dq, y) in other.rows[r].iter().enumerate() {
                        out[q_lo + dq - lo] += x * y;
                    }
                }
                out
            })
            .collect();
        BandedOperator {
            nu: self.nu,
            half_width: w,
            rows,
        }
    }

    /// `Tr B^i` for `i = 1..=n`.
    pub fn power_traces(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        out.push(self.trace());
        let mut pw = self.clone();
        for _ in 1..n {
            pw = pw.mul(self);
            out.push(pw.trace());
        }
        out
    }

    pub fn to_dense(&self, is_truncation: bool) -> Result<TruncatedOperator> {
        let l = self.degree();
        let mut m = DMatrix::<Complex64>::zeros(l + 1, l + 1);
        for (p, row) in self.rows.iter().enumerate() {
            let lo = self.first_col(p);
            for (off, v) in row.iter().enumerate() {
                m[(p, lo + off)] = *v;
            }
        }
        TruncatedOperator::new(self.nu, m, is_truncation)
    }
}

/// `T(A)` on degrees `0..=L` in band storage; the half-width is the input degree.
pub fn apply_channel_banded(a: &TruncatedOperator, params: &ChannelParams) -> Result<BandedOperator> {
    check_input(a, params)?;
    let n_in = a.degree();
    let l = params.output_degree;
    let pc = projection_coefficients(params, l);
    let gam = gamma_table(&pc, n_in);
    let rows: Vec<Vec<Complex64>> = (0..=l)
        .into_par_iter()
        .map(|p| {
            let lo = p.saturating_sub(n_in);
            let hi = (p + n_in).min(l);
            let mut row = vec![Complex64::new(0.0, 0.0); hi - lo + 1];
            for (q, out) in (lo..=hi).zip(row.iter_mut()) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, gpm) in gam[p].iter().enumerate() {
                    // m' = m - p + q
                    let mp = m as isize - p as isize + q as isize;
                    if mp < 0 || mp as usize >= gam[q].len() {
                        continue;
                    }
                    let mp = mp as usize;
                    acc += a.matrix[(m, mp)] * (gpm * gam[q][mp]);
                }
                *out = acc;
            }
            row
        })
        .collect();
    Ok(BandedOperator {
        nu: params.sigma(),
        half_width: n_in,
        rows,
    })
}

/// `T(A)` on degrees `0..=L` by exact finite sums.
pub fn apply_channel(a: &TruncatedOperator, params: &ChannelParams) -> Result<TruncatedOperator> {
    let banded = apply_channel_banded(a, params)?;
    let mut op = banded.to_dense(true)?;
    op.hermitian = a.hermitian && op.hermitian;
    Ok(op)
}

/// `Tr ψ(B) = Σ c_i Tr B^i` without diagonalising; no spectrum check.
pub fn functional_trace_banded(b: &BandedOperator, psi: &[f64]) -> Result<f64> {
    check_psi(psi)?;
    let traces = b.power_traces(psi.len() - 1);
    Ok(compensated_sum(psi.iter().skip(1).zip(&traces).map(|(c, t)| c * t)))
}

/// Diagonal `⟨T(A) ê_p, ê_p⟩` for `p = 0..=L`, without forming the matrix.
pub fn channel_diagonal(a: &TruncatedOperator, params: &ChannelParams) -> Result<Vec<f64>> {
    check_input(a, params)?;
    let pc = projection_coefficients(params, params.output_degree);
    let n_in = a.degree();
    let k = params.k;
    let diag: Vec<f64> = (0..=n_in).map(|m| a.matrix[(m, m)].re).collect();
    Ok((0..=params.output_degree)
        .into_par_iter()
        .map(|p| {
            compensated_sum((0..=n_in.min(p + k)).map(|m| {
                let g = pc.orthonormal(m, p + k - m);
                g * g * diag[m]
            }))
        })
        .collect())
}

pub(crate) fn check_psi(psi: &[f64]) -> Result<()> {
    if psi.is_empty() || psi[0] != 0.0 {
        return Err(Error::arg("psi must be a polynomial with psi(0) = 0"));
    }
    Ok(())
}

pub(crate) fn eval_poly(psi: &[f64], x: f64) -> f64 {
    psi.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Eigenvalues of a hermitian truncated operator, ascending.
pub fn spectrum(b: &TruncatedOperator) -> Result<Vec<f64>> {
    let mut eig: Vec<f64> = if is_diagonal(&b.matrix) {
        b.matrix.diagonal().iter().map(|c| c.re).collect()
    } else {
        if !b.hermitian {
            return Err(Error::arg("functional calculus needs a hermitian operator"));
        }
        b.matrix.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    };
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eig)
}

/// `Σ ψ(λ)` over a spectrum in `[0, 1]`, clamping points within
/// [`SPECTRUM_SLACK`] of the interval.
pub fn functional_trace_of_spectrum(eigs: &[f64], psi: &[f64]) -> Result<f64> {
    check_psi(psi)?;
    let mut acc = Compensated::new();
    for &l in eigs {
        if l < -SPECTRUM_SLACK || l > 1.0 + SPECTRUM_SLACK || !l.is_finite() {
            return Err(Error::SpectrumOutOfRange(l));
        }
        acc.add(eval_poly(psi, l.clamp(0.0, 1.0)));
    }
    Ok(acc.value())
}

/// `Tr ψ(B)` for a polynomial `ψ` with `ψ(0) = 0`, via the hermitian
/// eigendecomposition of `B`.
pub fn functional_trace(b: &TruncatedOperator, psi: &[f64]) -> Result<f64> {
    check_psi(psi)?;
    functional_trace_of_spectrum(&spectrum(b)?, psi)
}

/// `Σ_{p>L} ⟨T(A) ê_p, ê_p⟩` for positive `A` without using the trace
/// identity: the diagonal is summed explicitly up to `P = extend·L`, and past
/// `P` bounded by the envelope `2 d_P (P+σ)/(mu-1)` of a `p^{-mu}` decay.
pub fn diagonal_tail_bound(a: &TruncatedOperator, params: &ChannelParams, extend: usize) -> Result<f64> {
    check_input(a, params)?;
    if params.mu <= 1.0 || extend < 2 {
        return Err(Error::arg("diagonal tail needs mu > 1 and extend >= 2"));
    }
    let l = params.output_degree;
    let top = extend * l.max(1);
    let far = ChannelParams {
        output_degree: top,
        ..*params
    };
    let pc = projection_coefficients(&far, top);
    let n_in = a.degree();
    let k = params.k;
    let diag: Vec<f64> = (0..=n_in).map(|m| a.matrix[(m, m)].re).collect();
    let d = |p: usize| compensated_sum((0..=n_in.min(p + k)).map(|m| pc.orthonormal(m, p + k - m).powi(2) * diag[m]));
    let explicit: Vec<f64> = (l + 1..=top).into_par_iter().map(d).collect();
    let envelope = 2.0 * d(top) * (top as f64 + params.sigma()) / (params.mu - 1.0);
    Ok(compensated_sum(explicit) + envelope)
}

/// Bound on `Σ_{p>L} ψ(λ_p)` given the tail mass `Σ_{p>L} λ_p` and
/// `λ_p <= d_sup` there: `Σ_i |c_i| d_sup^{i-1} · mass`.
pub fn functional_tail_bound(mass: f64, d_sup: f64, psi: &[f64]) -> f64 {
    let mass = mass.max(0.0);
    psi.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.abs() * d_sup.clamp(0.0, 1.0).powi(i as i32 - 1) * mass)
        .sum()
}

/// `a_i = (1/2)_{i-1} / (2 i!)`, the coefficients of
/// `x = 1 - Σ_{i≥1} a_i (1-x²)^i` on `[0, 1]`.
pub fn sqrt_series_coefficient(i: u64) -> Result<f64> {
    if i == 0 {
        return Err(Error::arg("the square-root series starts at i = 1"));
    }
    let (l, _) = ln_pochhammer(0.5, i - 1);
    Ok(0.5 * (l - ln_factorial(i)).exp())
}

/// All coefficients `a_1..=a_n` by the ratio `a_{i+1}/a_i = (i-1/2)/(i+1)`.
pub fn sqrt_series_coefficients(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut a = 0.5;
    for i in 1..=n {
        out.push(a);
        a *= (i as f64 - 0.5) / (i as f64 + 1.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{channel_constant_sq, pochhammer};
    use approx::assert_relative_eq;

    #[test]
    fn pk_star_of_constant_is_difference_power() {
        // P_k*(1) = (-1)^k C (z - w)^k in the monomial basis
        for k in 0..5 {
            let params = ChannelParams::new(2.5, 3.0, k, 8).unwrap();
            let cst = channel_constant_sq(2.5, 3.0, k as u64).unwrap().sqrt();
            for (m, n, c) in pk_star_vector(&params, 0) {
                let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                let expected = cst * sign * binomial(k as u64, n as u64);
                assert_relative_eq!(c, expected, max_relative = 1e-12, epsilon = 1e-13);
                assert_eq!(m + n, k);
            }
        }
    }

    #[test]
    fn adjoint_pairing_on_small_grades() {
        // ⟨P* ζ^p, z^m w^n⟩ = ⟨ζ^p, P(z^m w^n)⟩ = c_{m,n} ‖ζ^p‖²
        let params = ChannelParams::new(2.0, 3.0, 2, 12).unwrap();
        let pc = projection_coefficients(&params, 12);
        let (lmu, lnu, lsig) = pc.ln_weights();
        for p in 0..10 {
            for (m, n, c) in pk_star_vector(&params, p) {
                let lhs = c * (-lmu[m] - lnu[n]).exp();
                let rhs = pc.monomial(m, n) * (-lsig[p]).exp();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn isometry_on_grades() {
        for k in 0..4 {
            let params = ChannelParams::new(3.0, 2.0, k, 60).unwrap();
            assert!(isometry_defect(&params, 60) < 1e-12);
        }
    }

    #[test]
    fn distinct_k_are_orthogonal() {
        let (mu, nu) = (2.0, 3.0);
        let pa = ChannelParams::new(mu, nu, 1, 40).unwrap();
        let pb = ChannelParams::new(mu, nu, 3, 40).unwrap();
        let ca = projection_coefficients(&pa, 40);
        let cb = projection_coefficients(&pb, 40);
        for g in 3..40 {
            let s: f64 = (0..=g)
                .map(|m| ca.orthonormal(m, g - m) * cb.orthonormal(m, g - m))
                .sum();
            assert!(s.abs() < 1e-12, "grade {g}: {s}");
        }
    }

    #[test]
    fn k0_lowest_state_eigenvalues() {
        let params = ChannelParams::new(2.0, 5.0, 0, 40).unwrap();
        let a = TruncatedOperator::basis_projector(2.0, 4, 0).unwrap();
        let out = apply_channel(&a, &params).unwrap();
        for p in 0..=40 {
            let expected = pochhammer(5.0, p as u64) / pochhammer(7.0, p as u64);
            assert_relative_eq!(out.matrix[(p, p)].re, expected, max_relative = 1e-12);
        }
        let d = channel_diagonal(&a, &params).unwrap();
        assert_relative_eq!(d[17], out.matrix[(17, 17)].re, max_relative = 1e-14);
    }

    #[test]
    fn channel_is_hermiticity_and_positivity_preserving() {
        let params = ChannelParams::new(3.0, 4.0, 1, 60).unwrap();
        let a = TruncatedOperator::random_state(3.0, 5, 2, 11).unwrap();
        let out = apply_channel(&a, &params).unwrap();
        assert!(out.hermitian);
        let eig = spectrum(&out).unwrap();
        assert!(eig[0] > -1e-12 && *eig.last().unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn functional_trace_checks() {
        let b = TruncatedOperator::from_diagonal(3.0, &[0.5, 0.25, 1.0 + 5e-10], true).unwrap();
        assert_relative_eq!(functional_trace(&b, &[0.0, 0.0, 1.0]).unwrap(), 0.25 + 0.0625 + 1.0);
        assert!(functional_trace(&b, &[1.0, 1.0]).is_err());
        let bad = TruncatedOperator::from_diagonal(3.0, &[0.5, 1.1], true).unwrap();
        assert!(matches!(
            functional_trace(&bad, &[0.0, 1.0]),
            Err(Error::SpectrumOutOfRange(_))
        ));
    }

    #[test]
    fn diagonal_tail_of_lowest_state_telescopes() {
        // mu = 2, k = 0: d_p = 30/((5+p)(6+p)), tail past L is 30/(6+L)
        let l = 200;
        let params = ChannelParams::new(2.0, 5.0, 0, l).unwrap();
        let a = TruncatedOperator::basis_projector(2.0, 0, 0).unwrap();
        let exact = 30.0 / (6.0 + l as f64);
        let bound = diagonal_tail_bound(&a, &params, 16).unwrap();
        // the envelope past P = 16 L at most doubles the remainder 30/(P+6)
        let past = 30.0 / (16.0 * l as f64 + 6.0);
        assert!(bound >= exact && bound <= exact + 2.0 * past, "{bound} vs {exact}");
    }

    #[test]
    fn diagonal_tail_brackets_the_trace() {
        let l = 2000;
        let params = ChannelParams::new(3.0, 5.0, 1, l).unwrap();
        let a = TruncatedOperator::random_state(3.0, 6, 3, 4).unwrap();
        let partial: f64 = channel_diagonal(&a, &params).unwrap().iter().sum();
        let full = params.trace_ratio() * a.trace().re;
        let tail = diagonal_tail_bound(&a, &params, 16).unwrap();
        assert!(partial <= full && full <= partial + tail * (1.0 + 1e-12));
        assert!(partial + tail - full <= 1e-5 * full, "slack {}", partial + tail - full);
    }

    #[test]
    fn banded_trace_matches_spectrum() {
        let params = ChannelParams::new(3.0, 4.0, 1, 80).unwrap();
        let a = TruncatedOperator::random_state(3.0, 4, 2, 5).unwrap();
        let band = apply_channel_banded(&a, &params).unwrap();
        let dense = apply_channel(&a, &params).unwrap();
        assert_eq!(band.get(10, 13), dense.matrix[(10, 13)]);
        assert_eq!(band.get(10, 15), Complex64::new(0.0, 0.0));
        let psi = [0.0, 0.5, -1.0, 2.0];
        assert_relative_eq!(
            functional_trace_banded(&band, &psi).unwrap(),
            functional_trace(&dense, &psi).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn sqrt_coefficients_agree() {
        let v = sqrt_series_coefficients(50);
        for (i, a) in v.iter().enumerate() {
            assert_relative_eq!(*a, sqrt_series_coefficient(i as u64 + 1).unwrap(), max_relative = 1e-13);
        }
        assert!(sqrt_series_coefficient(0).is_err());
    }

    #[test]
    fn constant_matches_norm_of_difference_power() {
        for k in 0..6u64 {
            let (mu, nu) = (2.5, 4.0);
            let mut s = 0.0;
            for j in 0..=k {
                s += binomial(k, j) / (pochhammer(mu, j) * pochhammer(nu, k - j));
            }
            s *= (1..=k).map(|i| i as f64).product::<f64>();
            assert_relative_eq!(channel_constant_sq(mu, nu, k).unwrap() * s, 1.0, max_relative = 1e-13);
        }
    }
}
