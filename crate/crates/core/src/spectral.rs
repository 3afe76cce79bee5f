//! Eigenfunction-side checks: `e_{λ,b}`, spherical functions, the Berezin
//! eigen-relation, inverse-Berezin multipliers and the chained-kernel integral.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bergman::check_weight;
use crate::disk::{gauss_jacobi_defect, DiskPoint, DiskQuadrature, RadialRule};
use crate::error::{Error, Result};
use crate::specfun::{berezin_eigenvalue, ln_gamma};
use crate::sum::Compensated;
use crate::transforms::{berezin_by_quadrature, DiskFunction};

/// A point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    b: Complex64,
}

impl BoundaryPoint {
    pub fn from_angle(theta: f64) -> Self {
        Self {
            b: Complex64::from_polar(1.0, theta),
        }
    }

    pub fn new(b: Complex64) -> Result<Self> {
        if !((b.norm() - 1.0).abs() <= 1e-14) {
            return Err(Error::OutOfRange(format!("boundary point {b} is off the unit circle")));
        }
        Ok(Self { b: b / b.norm() })
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }
}

/// `e_{λ,b}(z) = ((1-|z|²)/|z-b|²)^{(1-iλ)/2}`.
pub fn eigenfunction(lambda: f64, b: BoundaryPoint, p: &DiskPoint) -> Complex64 {
    let ln_base = p.defect().ln() - (p.z() - b.b).norm_sqr().ln();
    Complex64::from_polar((0.5 * ln_base).exp(), -0.5 * lambda * ln_base)
}

const SPHERICAL_TOL: f64 = 1e-10;
const SPHERICAL_MAX_NODES: usize = 1 << 24;

/// `φ_{n,λ}(z) = ∫ e_{λ,b}(z) b^n db` over the normalised circle.
///
/// Trapezoid rule, doubled until the change drops below `1e-10`.
pub fn spherical_function(n: i64, lambda: f64, p: &DiskPoint) -> Result<Complex64> {
    if p.z().norm() > 0.99 {
        return Err(Error::OutOfRange(format!("|z| = {} exceeds 0.99", p.z().norm())));
    }
    let term = |theta: f64| {
        let b = BoundaryPoint::from_angle(theta);
        eigenfunction(lambda, b, p) * Complex64::from_polar(1.0, n as f64 * theta)
    };
    let mut m = 64usize;
    let mut sum: Complex64 = (0..m).map(|j| term(2.0 * PI * j as f64 / m as f64)).sum();
    let mut value = sum / m as f64;
    while m < SPHERICAL_MAX_NODES {
        let odd: Complex64 = (0..m)
            .into_par_iter()
            .map(|j| term(2.0 * PI * (j as f64 + 0.5) / m as f64))
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        sum += odd;
        m *= 2;
        let next = sum / m as f64;
        let change = (next - value).norm();
        value = next;
        if change < SPHERICAL_TOL {
            return Ok(value);
        }
    }
    Err(Error::OutOfRange(format!(
        "spherical function did not settle at z = {}",
        p.z()
    )))
}

/// Base grid used by [`eigen_relation_residual`].
pub const EIGEN_GRID: (usize, usize) = (400, 512);
/// Boundary refinement of that grid: ring `i` gets `ceil(K / (1-u_i))` angles.
pub const EIGEN_REFINE: (f64, usize) = (64.0, 1 << 18);

/// The refined grid for `e_{λ,b}` at weight `nu`.
pub fn eigen_quadrature(nu: f64) -> Result<DiskQuadrature> {
    Ok(
        DiskQuadrature::with_rule(EIGEN_GRID.0, EIGEN_GRID.1, nu + 0.5, RadialRule::Jacobi)?
            .with_boundary_refinement(EIGEN_REFINE.0, EIGEN_REFINE.1),
    )
}

/// Eigenvalue of `(nu-1) B_nu` on `e_{λ,b}`.
///
/// With the exponent `(1-iλ)/2` the Gamma formula is evaluated at `λ/2`: the
/// large-`nu` expansion `1 - (¼ + τ²)/nu` must match the invariant Laplacian
/// eigenvalue `-(¼ + λ²/4)` of `e_{λ,b}`.
pub fn eigenfunction_eigenvalue(nu: f64, lambda: f64) -> Result<f64> {
    berezin_eigenvalue(nu, 0.5 * lambda)
}

/// `max |(nu-1) B_nu(e_{λ,b})(z) / e_{λ,b}(z) - b|` over the samples, `b` from
/// [`eigenfunction_eigenvalue`].
pub fn eigen_relation_residual(nu: f64, lambda: f64, b: BoundaryPoint, samples: &[DiskPoint]) -> Result<f64> {
    eigen_relation_residual_with(nu, lambda, b, samples, &eigen_quadrature(nu)?)
}

pub fn eigen_relation_residual_with(
    nu: f64,
    lambda: f64,
    b: BoundaryPoint,
    samples: &[DiskPoint],
    q: &DiskQuadrature,
) -> Result<f64> {
    check_weight(nu)?;
    let f = DiskFunction::eigenfunction(lambda, b);
    let target = eigenfunction_eigenvalue(nu, lambda)?;
    let mut worst: f64 = 0.0;
    for p in samples {
        let bz = berezin_by_quadrature(&f, nu, p.z(), q)?;
        let ratio = bz * (nu - 1.0) / eigenfunction(lambda, b, p);
        worst = worst.max((ratio - target).norm());
    }
    Ok(worst)
}

/// `b_nu(λ)^{-1} b_{nu0}(λ)`, the multiplier of `((nu-1)B_nu)^{-1} (nu0-1)B_{nu0}`.
pub fn inverse_multiplier(nu: f64, nu0: f64, lambda: f64) -> Result<f64> {
    check_weight(nu0)?;
    if nu < nu0 {
        return Err(Error::arg(format!("need nu >= nu0, got {nu} < {nu0}")));
    }
    if nu == nu0 {
        return Ok(1.0);
    }
    Ok(berezin_eigenvalue(nu0, lambda)? / berezin_eigenvalue(nu, lambda)?)
}

/// Uniform-in-λ bound on [`inverse_multiplier`] for integer `nu0 >= 2`:
/// `Π_{k<nu0} (k-½)² / (Γ(nu0)Γ(nu0-1)) · π Γ(nu)Γ(nu-1) / Γ(nu-½)²`,
/// attained at `λ = 0`. Uses `Π_{k<nu} (k-½)² = Γ(nu-½)²/π`.
pub fn inverse_multiplier_bound(nu: f64, nu0: u64) -> f64 {
    let n0 = nu0 as f64;
    let mut ln = 0.0;
    for k in 1..nu0 {
        ln += 2.0 * (k as f64 - 0.5).ln();
    }
    ln -= ln_gamma(n0) + ln_gamma(n0 - 1.0);
    ln += ln_gamma(nu) + ln_gamma(nu - 1.0) + PI.ln() - 2.0 * ln_gamma(nu - 0.5);
    ln.exp()
}

/// Monte Carlo estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 1 << 14;

/// `I_n(nu) = E[Π_{i<n} |1 - z_i z̄_{i+1}|^{-nu}]` with each `z_i` drawn from
/// the probability measure `(nu-1)(1-|z|²)^nu dι`.
///
/// Samples are split into fixed chunks, each with its own ChaCha stream, so the
/// result does not depend on the thread count.
pub fn chained_kernel_integral(n: usize, nu: f64, seed: u64, count: u64) -> Result<McEstimate> {
    check_weight(nu)?;
    if n == 0 {
        return Err(Error::arg("chain length must be at least 1"));
    }
    if n == 1 {
        return Ok(McEstimate {
            estimate: 1.0,
            half_width: 0.0,
            samples: 0,
        });
    }
    if count < 2 {
        return Err(Error::arg("need at least two samples"));
    }
    let chunks = count.div_ceil(MC_CHUNK);
    let inv = 1.0 / (nu - 1.0);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = MC_CHUNK.min(count - c * MC_CHUNK);
            let mut s1 = Compensated::new();
            let mut s2 = Compensated::new();
            let mut pts = vec![Complex64::new(0.0, 0.0); n];
            for _ in 0..len {
                for z in pts.iter_mut() {
                    let t: f64 = rng.gen::<f64>().powf(inv);
                    let th: f64 = rng.gen::<f64>() * 2.0 * PI;
                    *z = Complex64::from_polar((1.0 - t).sqrt(), th);
                }
                let mut ln = 0.0;
                for w in pts.windows(2) {
                    ln -= nu * (Complex64::new(1.0, 0.0) - w[0] * w[1].conj()).norm().ln();
                }
                let x = ln.exp();
                if !x.is_finite() {
                    return Err(Error::OutOfRange("non-finite chain integrand".into()));
                }
                s1.add(x);
                s2.add(x * x);
            }
            Ok((s1.value(), s2.value()))
        })
        .collect();
    let mut s1 = Compensated::new();
    let mut s2 = Compensated::new();
    for r in partial {
        let (a, b) = r?;
        s1.add(a);
        s2.add(b);
    }
    let nf = count as f64;
    let mean = s1.value() / nf;
    let var = ((s2.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        half_width: 1.96 * (var / nf).sqrt(),
        samples: count,
    })
}

/// `I_2(nu)` by tensor quadrature: Gauss–Jacobi in both defects and a
/// trapezoid rule in the relative angle.
pub fn chained_kernel_quadrature2(nu: f64, radial: usize, angular: usize) -> Result<f64> {
    check_weight(nu)?;
    if nu < 2.0 {
        return Err(Error::InsufficientDecay { have: nu, need: 2.0 });
    }
    let (t, lnw) = gauss_jacobi_defect(radial, nu - 2.0);
    let w: Vec<f64> = lnw.iter().map(|l| (nu - 1.0) * l.exp()).collect();
    let r: Vec<f64> = t.iter().map(|ti| (1.0 - ti).sqrt()).collect();
    let rows: Vec<f64> = (0..radial)
        .into_par_iter()
        .map(|i| {
            let mut acc = Compensated::new();
            for j in 0..radial {
                let rho = r[i] * r[j];
                let mut ang = Compensated::new();
                for a in 0..angular {
                    let d = Complex64::new(1.0, 0.0) - Complex64::from_polar(rho, 2.0 * PI * a as f64 / angular as f64);
                    ang.add((-nu * d.norm().ln()).exp());
                }
                acc.add(w[j] * ang.value() / angular as f64);
            }
            w[i] * acc.value()
        })
        .collect();
    let mut total = Compensated::new();
    for x in rows {
        total.add(x);
    }
    Ok(total.value())
}
