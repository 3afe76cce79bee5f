//! Hyperbolic disk geometry and quadrature for `dι = dz / (π (1-|z|²)²)`.
//!
//! A group element `g = (a, b)` with `|a|² - |b|² = 1` acts on points by
//! `g·z = (az - b̄)/(-bz + ā)`. The product is arranged so that
//! `(gh)·z = h·(g·z)`, which makes the pull-back action on holomorphic
//! functions a homomorphism.
//!
//! Points carry their defect `1 - |z|²` computed without cancellation, so
//! integrands with high powers of the defect stay accurate near the circle.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub a: Complex64,
    pub b: Complex64,
}

impl GroupElement {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if (det - 1.0).abs() > 1e-10 * a.norm_sqr().max(1.0) {
            return Err(Error::arg(format!("|a|^2 - |b|^2 = {det}, expected 1")));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `(e^{iθ}, 0)`: acts on points by `z ↦ e^{2iθ} z`.
    pub fn rotation(theta: f64) -> Self {
        Self {
            a: Complex64::from_polar(1.0, theta),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Group product with `(g.compose(h))·z = h·(g·z)`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.b.conj(),
            b: self.a * other.b + self.b * other.a.conj(),
        }
    }

    /// `g·0 = -b̄/ā`.
    pub fn origin_image(&self) -> Complex64 {
        -self.b.conj() / self.a.conj()
    }

    /// Denominator `-b z + ā` of the Möbius map.
    pub fn denominator(&self, z: Complex64) -> Complex64 {
        -self.b * z + self.a.conj()
    }
}

/// A point of the open disk with a cancellation-free `1 - |z|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    z: Complex64,
    defect: f64,
}

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        let r2 = z.norm_sqr();
        if !(r2 < 1.0) {
            return Err(Error::OutOfRange(format!("{z} is not inside the unit disk")));
        }
        Ok(Self {
            z,
            defect: (1.0 - z.norm()) * (1.0 + z.norm()),
        })
    }

    /// Build from `z` and a known defect; used by quadrature rules whose radial
    /// nodes are generated in the defect variable.
    pub(crate) fn with_defect(z: Complex64, defect: f64) -> Self {
        Self { z, defect }
    }

    pub fn origin() -> Self {
        Self {
            z: Complex64::new(0.0, 0.0),
            defect: 1.0,
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// `1 - |z|²`.
    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// `g·z`, with the defect propagated through `1-|g·z|² = (1-|z|²)/|-bz+ā|²`.
pub fn mobius(g: &GroupElement, p: &DiskPoint) -> DiskPoint {
    let den = g.denominator(p.z);
    let w = (g.a * p.z - g.b.conj()) / den;
    DiskPoint {
        z: w,
        defect: p.defect / den.norm_sqr(),
    }
}

/// The element `(a, b) = ((1-|w|²)^{-1/2}, -w̄ a)`, which sends `0` to `w`.
pub fn transporter(w: Complex64) -> Result<GroupElement> {
    let p = DiskPoint::new(w)?;
    let a = 1.0 / p.defect.sqrt();
    Ok(GroupElement {
        a: Complex64::new(a, 0.0),
        b: -w.conj() * a,
    })
}

/// Radial rule in `u = |z|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialRule {
    /// Gauss–Legendre on `u ∈ (0, 1)`.
    #[default]
    Legendre,
    /// Gauss–Jacobi for the weight `(1-u)^{min_decay-2}`.
    Jacobi,
}

/// Tensor rule: Gauss in `u = |z|²`, uniform trapezoid in the angle.
///
/// `integrate(h)` approximates `∫ h dι` for `h = O((1-|z|²)^{min_decay})`.
/// `integrate_reduced(g)` approximates `∫ (1-|z|²)^{min_decay} g dι`, which
/// avoids forming tiny and huge factors separately when the decay is large.
#[derive(Debug, Clone)]
pub struct DiskQuadrature {
    u: Vec<f64>,
    defect: Vec<f64>,
    full_weight: Vec<f64>,
    reduced_weight: Vec<f64>,
    angles: Vec<Complex64>,
    ring_angular: Vec<usize>,
    min_decay: f64,
    rule: RadialRule,
}

/// Default quadrature (Gauss–Legendre radial rule).
pub fn build_quadrature(radial: usize, angular: usize, min_decay: f64) -> Result<DiskQuadrature> {
    DiskQuadrature::with_rule(radial, angular, min_decay, RadialRule::Legendre)
}

impl DiskQuadrature {
    pub fn with_rule(radial: usize, angular: usize, min_decay: f64, rule: RadialRule) -> Result<Self> {
        if !(min_decay >= 2.0) {
            return Err(Error::InsufficientDecay {
                have: min_decay,
                need: 2.0,
            });
        }
        if radial == 0 || angular == 0 {
            return Err(Error::arg("quadrature needs at least one node in each direction"));
        }
        let alpha = match rule {
            RadialRule::Legendre => 0.0,
            RadialRule::Jacobi => min_decay - 2.0,
        };
        let (t, lnw) = gauss_jacobi_defect(radial, alpha);
        let mut u = Vec::with_capacity(radial);
        let mut full_weight = Vec::with_capacity(radial);
        let mut reduced_weight = Vec::with_capacity(radial);
        for (&ti, &lw) in t.iter().zip(&lnw) {
            let lt = ti.ln();
            u.push(1.0 - ti);
            full_weight.push((lw - (alpha + 2.0) * lt).exp());
            reduced_weight.push((lw + (min_decay - 2.0 - alpha) * lt).exp());
        }
        let angles = (0..angular)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / angular as f64))
            .collect();
        let ring_angular = vec![angular; radial];
        Ok(Self {
            u,
            defect: t,
            full_weight,
            reduced_weight,
            angles,
            ring_angular,
            min_decay,
            rule,
        })
    }

    /// Raise the angular count on ring `i` to `ceil(k / (1-u_i))`, at most `cap`.
    ///
    /// Integrands with a boundary singularity have angular features of width
    /// about `1-u` near the rim; the periodic trapezoid rule needs
    /// `M (1-u) >> 1` there.
    pub fn with_boundary_refinement(mut self, k: f64, cap: usize) -> Self {
        let base = self.angles.len();
        for (m, t) in self.ring_angular.iter_mut().zip(&self.defect) {
            let want = (k / t).ceil().min(cap as f64) as usize;
            *m = base.max(want);
        }
        self
    }

    pub fn radial_count(&self) -> usize {
        self.u.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angles.len()
    }

    pub fn min_decay(&self) -> f64 {
        self.min_decay
    }

    pub fn rule(&self) -> RadialRule {
        self.rule
    }

    /// Degree in `u` integrated exactly by the radial rule.
    pub fn polynomial_degree(&self) -> usize {
        2 * self.u.len() - 1
    }

    /// Angular node count on each ring.
    pub fn ring_angular_counts(&self) -> &[usize] {
        &self.ring_angular
    }

    fn point(&self, i: usize, j: usize) -> DiskPoint {
        let m = self.ring_angular[i];
        let e = if m == self.angles.len() {
            self.angles[j]
        } else {
            Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
        };
        DiskPoint::with_defect(e * self.u[i].sqrt(), self.defect[i])
    }

    /// Nodes of ring `i`, equally spaced in angle from `θ = 0`.
    pub fn ring_points(&self, i: usize) -> Vec<DiskPoint> {
        (0..self.ring_angular[i]).map(|j| self.point(i, j)).collect()
    }

    /// All nodes with the weights used by [`DiskQuadrature::integrate`].
    pub fn nodes(&self) -> Vec<(DiskPoint, f64)> {
        let mut out = Vec::with_capacity(self.ring_angular.iter().sum());
        for i in 0..self.u.len() {
            let m = self.ring_angular[i] as f64;
            for j in 0..self.ring_angular[i] {
                out.push((self.point(i, j), self.full_weight[i] / m));
            }
        }
        out
    }

    /// Per-ring weights of [`DiskQuadrature::integrate_reduced`], before the
    /// angular average.
    pub fn reduced_weights(&self) -> &[f64] {
        &self.reduced_weight
    }

    /// Radial nodes as `(u, 1-u)` pairs.
    pub fn radial_nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.defect.iter().copied())
    }

    fn ring_sums<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send + Copy + std::iter::Sum<T>,
        F: Fn(&DiskPoint) -> T + Sync,
    {
        (0..self.u.len())
            .into_par_iter()
            .map(|i| (0..self.ring_angular[i]).map(|j| f(&self.point(i, j))).sum::<T>())
            .collect()
    }

    fn combine(&self, rings: &[f64], weights: &[f64]) -> f64 {
        compensated_sum(
            rings
                .iter()
                .zip(weights)
                .zip(&self.ring_angular)
                .map(|((r, w), m)| r * w / *m as f64),
        )
    }

    pub fn integrate<F>(&self, h: F) -> f64
    where
        F: Fn(&DiskPoint) -> f64 + Sync,
    {
        let rings = self.ring_sums(h);
        self.combine(&rings, &self.full_weight)
    }

    pub fn integrate_complex<F>(&self, h: F) -> Complex64
    where
        F: Fn(&DiskPoint) -> Complex64 + Sync,
    {
        let rings = self.ring_sums(h);
        let re: Vec<f64> = rings.iter().map(|c| c.re).collect();
        let im: Vec<f64> = rings.iter().map(|c| c.im).collect();
        Complex64::new(
            self.combine(&re, &self.full_weight),
            self.combine(&im, &self.full_weight),
        )
    }

    /// `∫ (1-|z|²)^{min_decay} g(z) dι(z)`.
    pub fn integrate_reduced<F>(&self, g: F) -> f64
    where
        F: Fn(&DiskPoint) -> f64 + Sync,
    {
        let rings = self.ring_sums(g);
        self.combine(&rings, &self.reduced_weight)
    }

    pub fn integrate_reduced_complex<F>(&self, g: F) -> Complex64
    where
        F: Fn(&DiskPoint) -> Complex64 + Sync,
    {
        let rings = self.ring_sums(g);
        let re: Vec<f64> = rings.iter().map(|c| c.re).collect();
        let im: Vec<f64> = rings.iter().map(|c| c.im).collect();
        Complex64::new(
            self.combine(&re, &self.reduced_weight),
            self.combine(&im, &self.reduced_weight),
        )
    }
}

/// `|∫ h(g·z) dι - ∫ h dι|` on the given rule.
pub fn invariant_measure_check<F>(g: &GroupElement, h: F, q: &DiskQuadrature) -> f64
where
    F: Fn(&DiskPoint) -> f64 + Sync,
{
    let moved = q.integrate(|p| h(&mobius(g, p)));
    let fixed = q.integrate(&h);
    (moved - fixed).abs()
}

/// Gauss rule for `∫_0^1 t^alpha f(t) dt` via Golub–Welsch.
/// Returns nodes `t_i` ascending and `ln w_i`.
pub(crate) fn gauss_jacobi_defect(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    // Jacobi weight (1-x)^0 (1+x)^alpha on [-1,1], rescaled to t = (1+x)/2.
    let (a, b) = (0.0, alpha);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let nf = i as f64;
        let s = 2.0 * nf + a + b;
        let diag = if i == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jm[(i, i)] = 0.5 * (diag + 1.0);
        if i + 1 < n {
            let m = nf + 1.0;
            let s = 2.0 * m + a + b;
            let off = (4.0 * m * (m + a) * (m + b) * (m + a + b) / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jm[(i, i + 1)] = 0.5 * off;
            jm[(i + 1, i)] = 0.5 * off;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let ln_mu0 = -(alpha + 1.0).ln();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], ln_mu0 + 2.0 * v0.abs().ln())
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_beta;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn transporter_sends_origin_to_w() {
        let w = c(0.3, -0.45);
        let g = transporter(w).unwrap();
        assert!((g.origin_image() - w).norm() < 1e-15);
        assert!((mobius(&g, &DiskPoint::origin()).z() - w).norm() < 1e-15);
        assert!(transporter(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn product_composes_point_maps() {
        let g = transporter(c(0.2, 0.5)).unwrap().compose(&GroupElement::rotation(0.7));
        let h = transporter(c(-0.6, 0.1)).unwrap();
        let p = DiskPoint::new(c(0.33, -0.21)).unwrap();
        let lhs = mobius(&g.compose(&h), &p);
        let rhs = mobius(&h, &mobius(&g, &p));
        assert!((lhs.z() - rhs.z()).norm() < 1e-14);
        assert_relative_eq!(lhs.defect(), rhs.defect(), max_relative = 1e-13);
        let id = g.compose(&g.inverse());
        assert!((id.a - 1.0).norm() < 1e-14 && id.b.norm() < 1e-14);
    }

    #[test]
    fn defect_stays_accurate_near_boundary() {
        let g = transporter(c(0.999_999, 0.0)).unwrap();
        let p = DiskPoint::new(c(0.5, 0.0)).unwrap();
        let q = mobius(&g, &p);
        // 1-|g·z|² = (1-|z|²)(1-|w|²)/|1+w̄z|² for the transporter
        let w: f64 = 0.999_999;
        let expected = 0.75 * ((1.0 - w) * (1.0 + w)) / (1.0 + w * 0.5f64).powi(2);
        assert_relative_eq!(q.defect(), expected, max_relative = 1e-12);
    }

    #[test]
    fn gauss_jacobi_integrates_beta_moments() {
        for &alpha in &[0.0, 0.5, 3.0, 14.0] {
            let (t, lw) = gauss_jacobi_defect(12, alpha);
            for m in 0..20 {
                let s: f64 = t.iter().zip(&lw).map(|(ti, l)| l.exp() * ti.powi(m)).sum();
                let exact = ln_beta(alpha + 1.0 + m as f64, 1.0).exp();
                assert_relative_eq!(s, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_slow_decay() {
        assert!(matches!(
            build_quadrature(10, 10, 1.5),
            Err(Error::InsufficientDecay { .. })
        ));
    }

    #[test]
    fn reduced_and_full_agree() {
        let q = DiskQuadrature::with_rule(30, 8, 5.0, RadialRule::Jacobi).unwrap();
        let full = q.integrate(|p| p.defect().powi(5) * (1.0 + p.z().norm_sqr()));
        let red = q.integrate_reduced(|p| 1.0 + p.z().norm_sqr());
        assert_relative_eq!(full, red, max_relative = 1e-12);
        // ∫ (1-u)^5 (1+u) du/(1-u)^2 = B(1,4) + B(2,4)
        let exact = ln_beta(1.0, 4.0).exp() + ln_beta(2.0, 4.0).exp();
        assert_relative_eq!(red, exact, max_relative = 1e-12);
    }
}
