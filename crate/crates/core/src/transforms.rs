//! Transforms between operators on `H_nu` and functions on the disk.
//!
//! - covariant symbol `R_nu(A)(z) = A(z,z) (1-|z|²)^nu`
//! - Toeplitz quantisation `T_f = (nu-1) R_nu*(f)`
//! - Berezin transform `B_nu = R_nu R_nu*`
//! - Husimi functions `H_nu^i(A)` from transported basis vectors
//! - the combinations `E_{mu,k}` and `E^nu_{mu,k}` of Berezin transforms
//!
//! Radial polynomials in `1-|z|²` go through closed forms; anything else is
//! integrated with a Jacobi rule keyed to its declared boundary decay.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bergman::{check_weight, coherent_vector, ln_weight_table, transported_basis_vector, TruncatedOperator};
use crate::channel::check_psi;
use crate::disk::{mobius, transporter, DiskPoint, DiskQuadrature, RadialRule};
use crate::error::{Error, Result};
use crate::specfun::{binomial, channel_constant_sq, hyp2f1_series, pochhammer};
use crate::spectral::{eigenfunction, BoundaryPoint};
use crate::sum::Compensated;

/// Largest `|w|` accepted by [`husimi`].
pub const HUSIMI_MAX_RADIUS: f64 = 0.99;
/// Tail tolerance for Husimi values of truncated operators.
pub const HUSIMI_TAIL_TOL: f64 = 1e-10;

pub type SampledFn = Arc<dyn Fn(&DiskPoint) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum DiskFunctionForm {
    /// `Σ_i c_i (1-|z|²)^i`.
    RadialPoly(Vec<f64>),
    /// Helgason eigenfunction `e_{λ,b}`.
    Eigenfunction { lambda: f64, b: BoundaryPoint },
    /// Pointwise evaluation, integrated by quadrature.
    Sampled(SampledFn),
}

impl fmt::Debug for DiskFunctionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RadialPoly(c) => f.debug_tuple("RadialPoly").field(c).finish(),
            Self::Eigenfunction { lambda, b } => f
                .debug_struct("Eigenfunction")
                .field("lambda", lambda)
                .field("b", b)
                .finish(),
            Self::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

/// A function on the disk with declared decay `|f| = O((1-|z|²)^min_decay)`.
#[derive(Debug, Clone)]
pub struct DiskFunction {
    pub form: DiskFunctionForm,
    pub min_decay: f64,
    pub sup_bound: Option<f64>,
}

impl DiskFunction {
    pub fn radial_poly(coeffs: Vec<f64>) -> Self {
        let min_decay = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len()) as f64;
        let sup = coeffs.iter().map(|c| c.abs()).sum();
        Self {
            form: DiskFunctionForm::RadialPoly(coeffs),
            min_decay,
            sup_bound: Some(sup),
        }
    }

    pub fn eigenfunction(lambda: f64, b: BoundaryPoint) -> Self {
        Self {
            form: DiskFunctionForm::Eigenfunction { lambda, b },
            min_decay: 0.5,
            sup_bound: None,
        }
    }

    pub fn sampled(f: SampledFn, min_decay: f64, sup_bound: Option<f64>) -> Self {
        Self {
            form: DiskFunctionForm::Sampled(f),
            min_decay,
            sup_bound,
        }
    }

    pub fn eval(&self, p: &DiskPoint) -> Complex64 {
        match &self.form {
            DiskFunctionForm::RadialPoly(c) => {
                let t = p.defect();
                Complex64::new(c.iter().rev().fold(0.0, |acc, ci| acc * t + ci), 0.0)
            }
            DiskFunctionForm::Eigenfunction { lambda, b } => eigenfunction(*lambda, *b, p),
            DiskFunctionForm::Sampled(f) => f(p),
        }
    }

    /// `f / (1-|z|²)^min_decay`, bounded on the disk.
    pub fn eval_reduced(&self, p: &DiskPoint) -> Complex64 {
        match &self.form {
            DiskFunctionForm::RadialPoly(c) => {
                let t = p.defect();
                let s = self.min_decay as usize;
                Complex64::new(c[s.min(c.len())..].iter().rev().fold(0.0, |acc, ci| acc * t + ci), 0.0)
            }
            _ => self.eval(p) / p.defect().powf(self.min_decay),
        }
    }

    /// Closed-form `∫ f dι` for radial polynomials.
    pub fn radial_integral(&self) -> Result<f64> {
        match &self.form {
            DiskFunctionForm::RadialPoly(c) => radial_poly_integral(c),
            _ => Err(Error::arg("closed-form integral only for radial polynomials")),
        }
    }
}

/// `∫ Σ c_j (1-|z|²)^j dι = Σ c_j / (j-1)`.
pub fn radial_poly_integral(c: &[f64]) -> Result<f64> {
    let mut acc = Compensated::new();
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        if j < 2 {
            return Err(Error::InsufficientDecay {
                have: j as f64,
                need: 2.0,
            });
        }
        acc.add(cj / (j as f64 - 1.0));
    }
    Ok(acc.value())
}

/// Coefficients of `(Σ c_i t^i)^n`.
pub fn radial_poly_power(c: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; out.len() + c.len() - 1];
        for (i, a) in out.iter().enumerate() {
            for (j, b) in c.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out = next;
    }
    out
}

fn check_decay(nu: f64, f: &DiskFunction) -> Result<()> {
    if nu + f.min_decay < 2.0 {
        return Err(Error::InsufficientDecay {
            have: nu + f.min_decay,
            need: 2.0,
        });
    }
    Ok(())
}

/// `R_nu(A)(z) = ⟨A k_z, k_z⟩` with `k_z` the normalised coherent vector.
pub fn covariant_symbol(a: &TruncatedOperator, z: Complex64) -> Result<Complex64> {
    let cv = coherent_vector(a.nu, z, a.degree())?;
    Ok(quadratic_form(a, &cv.coeffs))
}

fn quadratic_form(a: &TruncatedOperator, v: &[Complex64]) -> Complex64 {
    let n = a.degree() + 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for q in 0..n {
            let x = a.matrix[(p, q)];
            if x != Complex64::new(0.0, 0.0) {
                row += x * v[q];
            }
        }
        acc += v[p].conj() * row;
    }
    acc
}

/// Quadrature used when no closed form applies: a Jacobi rule keyed to the
/// total decay, cached by `(radial, angular, decay)`.
pub fn default_quadrature(radial: usize, angular: usize, decay: f64) -> Result<Arc<DiskQuadrature>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, u64), Arc<DiskQuadrature>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (radial, angular, decay.to_bits());
    if let Some(q) = cache.lock().unwrap().get(&key) {
        return Ok(q.clone());
    }
    let q = Arc::new(DiskQuadrature::with_rule(radial, angular, decay, RadialRule::Jacobi)?);
    cache.lock().unwrap().insert(key, q.clone());
    Ok(q)
}

/// `T_f` on degrees `0..=degree`; entries
/// `(nu-1) ∫ f ê_n conj(ê_m) (1-|z|²)^nu dι`.
pub fn toeplitz_operator(f: &DiskFunction, nu: f64, degree: usize) -> Result<TruncatedOperator> {
    check_weight(nu)?;
    check_decay(nu, f)?;
    match &f.form {
        DiskFunctionForm::RadialPoly(c) => {
            let diag = toeplitz_radial_diagonal(c, nu, degree);
            TruncatedOperator::from_diagonal(nu, &diag, true)
        }
        _ => {
            let q = default_quadrature((degree + 40).max(64), 2 * degree + 16, nu + f.min_decay)?;
            toeplitz_by_quadrature(f, nu, degree, &q)
        }
    }
}

/// Diagonal of `T_f` for `f = Σ c_i (1-|z|²)^i`:
/// `t_m = Σ c_i (nu-1)_i / (nu+m)_i`, from `(nu-1)(nu)_m/m! B(m+1, nu+i-1)`.
pub fn toeplitz_radial_diagonal(c: &[f64], nu: f64, degree: usize) -> Vec<f64> {
    (0..=degree)
        .into_par_iter()
        .map(|m| {
            let mut acc = Compensated::new();
            for (i, &ci) in c.iter().enumerate() {
                if ci != 0.0 {
                    acc.add(ci * pochhammer(nu - 1.0, i as u64) / pochhammer(nu + m as f64, i as u64));
                }
            }
            acc.value()
        })
        .collect()
}

/// Quadrature route for [`toeplitz_operator`]; the rule must be keyed to
/// `nu + f.min_decay`.
pub fn toeplitz_by_quadrature(
    f: &DiskFunction,
    nu: f64,
    degree: usize,
    q: &DiskQuadrature,
) -> Result<TruncatedOperator> {
    check_decay(nu, f)?;
    if (q.min_decay() - (nu + f.min_decay)).abs() > 1e-12 {
        return Err(Error::arg("quadrature must be keyed to nu + min_decay"));
    }
    let n = degree + 1;
    let lw = ln_weight_table(nu, n);
    // angular Fourier modes d = n - m in [-degree, degree] on every ring
    let mut mat = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let rings: Vec<(f64, f64)> = q.radial_nodes().collect();
    let rw = q.reduced_weights();
    for (i, &(u, _)) in rings.iter().enumerate() {
        let r = u.sqrt();
        let ring = q.ring_points(i);
        let m_ang = ring.len();
        let vals: Vec<Complex64> = ring.iter().map(|p| f.eval_reduced(p)).collect();
        let mut modes = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
        for (d, slot) in modes.iter_mut().enumerate() {
            let dd = d as isize - degree as isize;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                let th = 2.0 * std::f64::consts::PI * j as f64 / m_ang as f64;
                acc += v * Complex64::from_polar(1.0, dd as f64 * th);
            }
            *slot = acc / m_ang as f64;
        }
        let lr = r.ln();
        for mm in 0..n {
            for nn in 0..n {
                // f z^nn conj(z)^mm averages to r^{mm+nn} times mode (nn - mm)
                let d = (nn as isize - mm as isize + degree as isize) as usize;
                let mag = if mm + nn == 0 {
                    1.0
                } else {
                    (0.5 * (lw[mm] + lw[nn]) + (mm + nn) as f64 * lr).exp()
                };
                mat[(mm, nn)] += modes[d] * (rw[i] * mag * (nu - 1.0));
            }
        }
    }
    TruncatedOperator::new(nu, mat, true)
}

/// `B_nu(f)(z) = ∫ ((1-|z|²)(1-|x|²)/|1-z x̄|²)^nu f(x) dι(x)`.
pub fn berezin_transform(f: &DiskFunction, nu: f64, z: Complex64) -> Result<Complex64> {
    check_weight(nu)?;
    check_decay(nu, f)?;
    match &f.form {
        DiskFunctionForm::RadialPoly(c) => {
            let p = DiskPoint::new(z)?;
            let x = z.norm_sqr();
            let t = p.defect();
            let mut acc = Compensated::new();
            for (i, &ci) in c.iter().enumerate() {
                if ci == 0.0 {
                    continue;
                }
                let fi = i as f64;
                // (1-|z|²)^i 2F1(i, i; nu+i; |z|²) / (nu+i-1)
                let h = hyp2f1_series(fi, fi, nu + fi, x)?;
                acc.add(ci * t.powi(i as i32) * h / (nu + fi - 1.0));
            }
            Ok(Complex64::new(acc.value(), 0.0))
        }
        _ => {
            let q = default_quadrature(400, 512, nu + f.min_decay)?;
            berezin_by_quadrature(f, nu, z, &q)
        }
    }
}

/// Quadrature route: `∫ (1-|x|²)^nu f(g·x) dι(x)` with `g·0 = z`.
pub fn berezin_by_quadrature(f: &DiskFunction, nu: f64, z: Complex64, q: &DiskQuadrature) -> Result<Complex64> {
    check_decay(nu, f)?;
    if (q.min_decay() - (nu + f.min_decay)).abs() > 1e-12 {
        return Err(Error::arg("quadrature must be keyed to nu + min_decay"));
    }
    let g = transporter(z)?;
    let md = f.min_decay;
    // f(g·x) / (1-|x|²)^md = f_red(g·x) ((1-|g·x|²)/(1-|x|²))^md
    Ok(q.integrate_reduced_complex(|p| {
        let gp = mobius(&g, p);
        f.eval_reduced(&gp) * (gp.defect() / p.defect()).powf(md)
    }))
}

/// `H_nu^i(A)(w) = ⟨A U ê_i, U ê_i⟩` where `U` maps the vacuum to the
/// normalised coherent state at `w`.
pub fn husimi(a: &TruncatedOperator, i: usize, w: Complex64) -> Result<f64> {
    if w.norm() > HUSIMI_MAX_RADIUS {
        return Err(Error::OutOfRange(format!(
            "|w| = {} exceeds {HUSIMI_MAX_RADIUS}",
            w.norm()
        )));
    }
    let g = transporter(w)?.inverse();
    let (v, tail) = transported_basis_vector(&g, a.nu, i, a.degree())?;
    if a.is_truncation && tail > HUSIMI_TAIL_TOL {
        return Err(Error::TailExceeded {
            tail,
            tol: HUSIMI_TAIL_TOL,
        });
    }
    Ok(quadratic_form(a, &v).re)
}

/// `∫ H_nu^i(A) dι`, exact for finite matrices. Equals `Tr A / (nu-1)`.
pub fn husimi_integral(a: &TruncatedOperator, i: usize) -> Result<f64> {
    husimi_psi_integral(a, i, &[0.0, 1.0])
}

/// `∫ ψ(H_nu^i(A)) dι` for a polynomial `ψ` with `ψ(0) = 0`.
///
/// On degrees `<= N` the transported vector is `(1-|w|²)^{nu/2}` times a
/// polynomial in `w, w̄` of degree `<= N + i`, so for integer `nu` a Jacobi
/// rule keyed to `nu` with enough nodes integrates `ψ(H)` exactly. No radius
/// cut-off applies here.
pub fn husimi_psi_integral(a: &TruncatedOperator, i_state: usize, psi: &[f64]) -> Result<f64> {
    check_psi(psi)?;
    let nu = a.nu;
    if nu < 2.0 {
        return Err(Error::InsufficientDecay { have: nu, need: 2.0 });
    }
    let deg = a.degree() + i_state;
    let top = psi.len() - 1;
    let radial = (top * (deg + nu.ceil() as usize)) / 2 + 4;
    let q = DiskQuadrature::with_rule(radial, 2 * top * deg + 4, nu, RadialRule::Jacobi)?;
    let mut acc = Compensated::new();
    for (r, w) in q.reduced_weights().iter().enumerate() {
        let ring = q.ring_points(r);
        let mut sum = Compensated::new();
        for p in &ring {
            let g = transporter(p.z())?.inverse();
            let (v, _) = transported_basis_vector(&g, nu, i_state, a.degree())?;
            let t_nu = p.defect().powf(nu);
            let h = quadratic_form(a, &v).re / t_nu;
            // ψ(H) / t^nu with H = h t^nu
            let mut val = 0.0;
            let mut pow = h;
            for c in &psi[1..] {
                val += c * pow;
                pow *= h * t_nu;
            }
            sum.add(val);
        }
        acc.add(w * sum.value() / ring.len() as f64);
    }
    Ok(acc.value())
}

/// `E_{mu,k}(f)`, or `E^nu_{mu,k}(f)` when `nu` is given, at `z`.
pub fn e_mu_k(f: &DiskFunction, mu: f64, k: usize, z: Complex64, nu: Option<f64>) -> Result<Complex64> {
    check_weight(mu)?;
    let ku = k as u64;
    let (scale, coef): (f64, Vec<f64>) = match nu {
        None => {
            let s = pochhammer(mu, ku) / pochhammer(1.0, ku);
            (s, (0..=k).map(|_| 1.0).collect())
        }
        Some(nu) => {
            let s = channel_constant_sq(mu, nu, ku)?;
            let pn = pochhammer(nu, ku);
            (s, (0..=k).map(|j| pochhammer(nu + (k - j) as f64, ku) / pn).collect())
        }
    };
    let mut re = Compensated::new();
    let mut im = Compensated::new();
    for j in 0..=k {
        let b = berezin_transform(f, mu + j as f64, z)?;
        let c = binomial(ku, j as u64) * coef[j] * if j % 2 == 0 { 1.0 } else { -1.0 };
        re.add(c * b.re);
        im.add(c * b.im);
    }
    Ok(Complex64::new(re.value(), im.value()) * scale)
}
