//! Truncated weighted Bergman spaces.
//!
//! `H_nu` has orthonormal basis `ê_j = sqrt((nu)_j / j!) z^j`; operators are
//! stored as complex matrices in that basis, truncated at degree `N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::disk::{DiskPoint, GroupElement};
use crate::error::{Error, Result};
use crate::sum::Compensated;

pub const DEFAULT_DEGREE: usize = 256;

pub(crate) fn check_weight(nu: f64) -> Result<()> {
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(Error::InvalidWeight {
            weight: nu,
            reason: "weights must be finite and exceed 1",
        });
    }
    Ok(())
}

/// `ln((nu)_j / j!)` for `j = 0..len`, accumulated with compensation.
pub fn ln_weight_table(nu: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = Compensated::new();
    for j in 0..len {
        out.push(acc.value());
        acc.add(((nu - 1.0) / (j as f64 + 1.0)).ln_1p());
    }
    out
}

/// `‖z^j‖²_nu = j! / (nu)_j`.
pub fn monomial_norm_sq(nu: f64, j: usize) -> Result<f64> {
    check_weight(nu)?;
    Ok((-ln_weight_table(nu, j + 1)[j]).exp())
}

/// `K^nu(x, y) = (1 - x ȳ)^{-nu}` on the principal branch.
pub fn kernel_eval(nu: f64, x: Complex64, y: Complex64) -> Complex64 {
    let base = Complex64::new(1.0, 0.0) - x * y.conj();
    if nu == nu.floor() && nu.abs() < 1.0e6 {
        base.powi(-(nu as i32))
    } else {
        (-nu * base.ln()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSpace {
    pub nu: f64,
    pub degree: usize,
}

impl TruncatedSpace {
    pub fn new(nu: f64, degree: usize) -> Result<Self> {
        check_weight(nu)?;
        Ok(Self { nu, degree })
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// `ê_j(z)` for `j = 0..=degree`.
    pub fn basis_values(&self, z: Complex64) -> Vec<Complex64> {
        let lw = ln_weight_table(self.nu, self.dim());
        let mut out = Vec::with_capacity(self.dim());
        let mut zp = Complex64::new(1.0, 0.0);
        for l in lw {
            out.push(zp * (0.5 * l).exp());
            zp *= z;
        }
        out
    }
}

/// An operator on `H_nu` in the orthonormal basis, cut at degree `N`.
///
/// `is_truncation` records whether the operator is the compression of one
/// with infinite support; finite-rank inputs built on the retained degrees
/// are exact and set it to false.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub nu: f64,
    pub matrix: DMatrix<Complex64>,
    pub hermitian: bool,
    pub is_truncation: bool,
}

impl TruncatedOperator {
    pub fn new(nu: f64, matrix: DMatrix<Complex64>, is_truncation: bool) -> Result<Self> {
        check_weight(nu)?;
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::arg("operator matrix must be square and non-empty"));
        }
        let hermitian = is_hermitian(&matrix, 1e-12);
        Ok(Self {
            nu,
            matrix,
            hermitian,
            is_truncation,
        })
    }

    pub fn from_diagonal(nu: f64, diag: &[f64], is_truncation: bool) -> Result<Self> {
        let n = diag.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(nu, m, is_truncation)
    }

    /// Rank-one projector `ê_i ê_i*` on degrees `0..=degree`.
    pub fn basis_projector(nu: f64, degree: usize, i: usize) -> Result<Self> {
        if i > degree {
            return Err(Error::arg("basis index beyond the truncation degree"));
        }
        let mut d = vec![0.0; degree + 1];
        d[i] = 1.0;
        Self::from_diagonal(nu, &d, false)
    }

    /// Random positive operator of the given rank and unit trace.
    pub fn random_state(nu: f64, degree: usize, rank: usize, seed: u64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::arg("rank must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = degree + 1;
        let v = DMatrix::from_fn(n, rank, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        let mut m = &v * v.adjoint();
        let tr = m.trace().re;
        m /= Complex64::new(tr, 0.0);
        // enforce exact hermitian symmetry
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self::new(nu, m, false)
    }

    pub fn degree(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest diagonal index with a nonzero row or column.
    pub fn support_degree(&self) -> usize {
        let n = self.matrix.nrows();
        (0..n)
            .rev()
            .find(|&i| {
                (0..n).any(|j| {
                    self.matrix[(i, j)] != Complex64::new(0.0, 0.0) || self.matrix[(j, i)] != Complex64::new(0.0, 0.0)
                })
            })
            .unwrap_or(0)
    }

    pub fn hs_norm(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix entry with zero beyond the truncation.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        if i < self.matrix.nrows() && j < self.matrix.ncols() {
            self.matrix[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

pub(crate) fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, c| acc.max(c.norm())).max(1e-300);
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Normalised coherent vector `K_w / ‖K_w‖` in the orthonormal basis.
#[derive(Debug, Clone)]
pub struct CoherentVector {
    pub coeffs: Vec<Complex64>,
    /// Bound on the squared norm missing beyond the truncation.
    pub tail: f64,
}

pub fn coherent_vector(nu: f64, w: Complex64, degree: usize) -> Result<CoherentVector> {
    check_weight(nu)?;
    let p = DiskPoint::new(w)?;
    let lw = ln_weight_table(nu, degree + 2);
    let r2 = w.norm_sqr();
    let half_ln_def = 0.5 * nu * p.defect().ln();
    let mut coeffs = Vec::with_capacity(degree + 1);
    let wbar = w.conj();
    let mut phase = Complex64::new(1.0, 0.0);
    let unit = if r2 > 0.0 {
        wbar / wbar.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let ln_r = if r2 > 0.0 { w.norm().ln() } else { f64::NEG_INFINITY };
    for (i, &l) in lw.iter().take(degree + 1).enumerate() {
        let lmag = 0.5 * l + half_ln_def + if i == 0 { 0.0 } else { i as f64 * ln_r };
        coeffs.push(phase * lmag.exp());
        phase *= unit;
    }
    let next = degree + 1;
    let t_next = (lw[next]
        + 2.0 * half_ln_def
        + if r2 > 0.0 {
            2.0 * next as f64 * ln_r
        } else {
            f64::NEG_INFINITY
        })
    .exp();
    let ratio = r2 * (nu + next as f64) / (next as f64 + 1.0);
    let tail = if ratio < 1.0 {
        t_next / (1.0 - ratio)
    } else {
        (1.0 - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(t_next)
    };
    Ok(CoherentVector { coeffs, tail })
}

/// Coefficients of `φ(z) = (az - b̄)/(ā - bz)` up to degree `n`.
fn mobius_series(g: &GroupElement, n: usize) -> Vec<Complex64> {
    let abar = g.a.conj();
    let rho = g.b / abar;
    let mut out = Vec::with_capacity(n + 1);
    out.push(-g.b.conj() / abar);
    let mut pw = Complex64::new(1.0, 0.0) / (abar * abar);
    for _ in 1..=n {
        out.push(pw);
        pw *= rho;
    }
    out
}

/// Monomial coefficients of `(ā - bz)^{-nu}` up to degree `n`.
fn cocycle_series(g: &GroupElement, nu: f64, n: usize) -> Vec<Complex64> {
    let abar = g.a.conj();
    let rho = g.b / abar;
    let mut out = Vec::with_capacity(n + 1);
    let mut c = (-nu * abar.ln()).exp();
    for s in 0..=n {
        out.push(c);
        c = c * rho * ((nu + s as f64) / (s as f64 + 1.0));
    }
    out
}

fn mul_truncated(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, xi) in x.iter().enumerate() {
        if *xi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, yj) in out[i..].iter_mut().zip(y) {
            *o += xi * yj;
        }
    }
    out
}

fn to_orthonormal(monomial: &[Complex64], lw: &[f64], j: usize) -> Vec<Complex64> {
    monomial
        .iter()
        .enumerate()
        .map(|(i, c)| c * (0.5 * (lw[j] - lw[i])).exp())
        .collect()
}

/// `g·ê_i = sqrt((nu)_i/i!) (-bz+ā)^{-nu} (g·z)^i` in the orthonormal basis up
/// to `degree`, together with the squared norm lost beyond it.
///
/// For non-integer `nu` the principal branch fixes a global phase.
pub fn transported_basis_vector(g: &GroupElement, nu: f64, i: usize, degree: usize) -> Result<(Vec<Complex64>, f64)> {
    check_weight(nu)?;
    let lw = ln_weight_table(nu, degree.max(i) + 1);
    let phi = mobius_series(g, degree);
    let mut col = cocycle_series(g, nu, degree);
    for _ in 0..i {
        col = mul_truncated(&col, &phi);
    }
    let v = to_orthonormal(&col, &lw, i);
    let tail = (1.0 - v.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0);
    Ok((v, tail))
}

#[derive(Debug, Clone)]
pub struct GroupActionMatrix {
    pub matrix: DMatrix<Complex64>,
    /// Squared norm of each column lost beyond the truncation.
    pub column_tails: Vec<f64>,
    /// Largest column tail over the leading half block.
    pub tail: f64,
}

/// Matrix of `f ↦ (-bz+ā)^{-nu} f(g·z)` on degrees `0..=degree`.
///
/// Needs integer `nu` and `|g·0| <= 0.99`; errors when the leading half block
/// loses more than `tol` of its squared norm.
pub fn group_action_matrix(g: &GroupElement, nu: f64, degree: usize, tol: f64) -> Result<GroupActionMatrix> {
    check_weight(nu)?;
    if nu != nu.floor() {
        return Err(Error::InvalidWeight {
            weight: nu,
            reason: "the group action needs an integer weight",
        });
    }
    let r = g.origin_image().norm();
    if r > 0.99 {
        return Err(Error::OutOfRange(format!("|g·0| = {r} exceeds 0.99")));
    }
    let n = degree + 1;
    let lw = ln_weight_table(nu, n);
    let phi = mobius_series(g, degree);
    let mut col = cocycle_series(g, nu, degree);
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    let mut column_tails = Vec::with_capacity(n);
    for j in 0..n {
        if j > 0 {
            col = mul_truncated(&col, &phi);
        }
        let v = to_orthonormal(&col, &lw, j);
        column_tails.push((1.0 - v.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0));
        for (i, c) in v.into_iter().enumerate() {
            matrix[(i, j)] = c;
        }
    }
    let tail = column_tails[..=degree / 2].iter().cloned().fold(0.0, f64::max);
    if tail > tol {
        return Err(Error::TailExceeded { tail, tol });
    }
    Ok(GroupActionMatrix {
        matrix,
        column_tails,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::transporter;
    use crate::specfun::pochhammer;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norms_match_pochhammer_ratio() {
        for &nu in &[2.0, 3.5, 10.0] {
            for j in 0..20 {
                let direct: f64 = (1..=j).map(|k| k as f64).product::<f64>() / pochhammer(nu, j as u64);
                assert_relative_eq!(monomial_norm_sq(nu, j).unwrap(), direct, max_relative = 1e-14);
            }
        }
        assert!(monomial_norm_sq(0.5, 3).is_err());
    }

    #[test]
    fn kernel_is_basis_expansion() {
        let sp = TruncatedSpace::new(3.0, 200).unwrap();
        let (x, y) = (c(0.3, 0.2), c(-0.1, 0.4));
        let ex = sp.basis_values(x);
        let ey = sp.basis_values(y);
        let series: Complex64 = ex.iter().zip(&ey).map(|(a, b)| a * b.conj()).sum();
        assert!((series - kernel_eval(3.0, x, y)).norm() < 1e-13);
        // non-integer weight goes through the principal branch
        let k = kernel_eval(2.5, x, y);
        let series: Complex64 = TruncatedSpace::new(2.5, 200)
            .unwrap()
            .basis_values(x)
            .iter()
            .zip(&TruncatedSpace::new(2.5, 200).unwrap().basis_values(y))
            .map(|(a, b)| a * b.conj())
            .sum();
        assert!((series - k).norm() < 1e-13);
    }

    #[test]
    fn coherent_vector_is_normalised() {
        let w = c(0.6, -0.3);
        let cv = coherent_vector(4.0, w, 300).unwrap();
        let s: f64 = cv.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!(s <= 1.0 + 1e-13 && s >= 1.0 - cv.tail - 1e-13);
        assert!(cv.tail < 1e-30);
        assert!(coherent_vector(4.0, c(1.0, 0.0), 10).is_err());
    }

    #[test]
    fn rotation_acts_diagonally() {
        let theta = 0.37;
        let m = group_action_matrix(&GroupElement::rotation(theta), 3.0, 20, 1e-12).unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                let expected = if i == j {
                    Complex64::from_polar(1.0, (3.0 + 2.0 * j as f64) * theta)
                } else {
                    c(0.0, 0.0)
                };
                assert!((m.matrix[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn action_is_unitary_on_leading_block() {
        let g = transporter(c(0.12, -0.16)).unwrap();
        let m = group_action_matrix(&g, 2.0, 128, 1e-8).unwrap();
        let block = m.matrix.view((0, 0), (129, 65)).into_owned();
        let gram = block.adjoint() * &block;
        let err = (gram - DMatrix::<Complex64>::identity(65, 65)).norm();
        assert!(err <= 1e-8, "unitarity defect {err}");
    }

    #[test]
    fn action_rejects_bad_inputs() {
        let g = transporter(c(0.995, 0.0)).unwrap();
        assert!(matches!(
            group_action_matrix(&g, 2.0, 16, 1e-8),
            Err(Error::OutOfRange(_))
        ));
        let g = transporter(c(0.3, 0.0)).unwrap();
        assert!(group_action_matrix(&g, 2.5, 16, 1e-8).is_err());
        let g = transporter(c(0.9, 0.0)).unwrap();
        assert!(matches!(
            group_action_matrix(&g, 2.0, 16, 1e-8),
            Err(Error::TailExceeded { .. })
        ));
    }

    #[test]
    fn action_is_a_homomorphism() {
        let g = transporter(c(0.2, -0.1)).unwrap();
        let h = transporter(c(-0.15, 0.25))
            .unwrap()
            .compose(&GroupElement::rotation(0.4));
        let n = 120;
        let mg = group_action_matrix(&g, 3.0, n, 1.0).unwrap().matrix;
        let mh = group_action_matrix(&h, 3.0, n, 1.0).unwrap().matrix;
        let mgh = group_action_matrix(&g.compose(&h), 3.0, n, 1.0).unwrap().matrix;
        let prod = &mg * &mh;
        let err = (prod.view((0, 0), (30, 30)) - mgh.view((0, 0), (30, 30))).norm();
        assert!(err < 1e-10, "homomorphism defect {err}");
    }

    #[test]
    fn transported_vacuum_is_coherent_state() {
        // g·1 = (ā - bz)^{-nu} is the coherent vector at the point b̄/a
        let g = transporter(c(0.4, 0.2)).unwrap();
        let (v, tail) = transported_basis_vector(&g, 3.0, 0, 80).unwrap();
        let cv = coherent_vector(3.0, g.b.conj() / g.a, 80).unwrap();
        assert!(tail < 1e-12);
        for (x, y) in v.iter().zip(&cv.coeffs) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn random_state_is_a_density_matrix() {
        let a = TruncatedOperator::random_state(3.0, 6, 3, 7).unwrap();
        assert!(a.hermitian);
        assert_relative_eq!(a.trace().re, 1.0, max_relative = 1e-14);
        let eig = a.matrix.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-14));
        assert_eq!(eig.eigenvalues.iter().filter(|&&l| l > 1e-12).count(), 3);
    }
}
