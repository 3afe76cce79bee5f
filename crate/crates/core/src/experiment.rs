//! ν-sweeps driven by a flat TOML config, with CSV/JSON reports.
//!
//! Every experiment produces one row per weight in `nu_list`:
//! `nu, measured, target, abs_error, tail_bound, seconds`. Rows run on the
//! rayon pool and are collected in list order; wall-clock time is the only
//! nondeterministic column and is zeroed when `record_timing = false`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::bergman::TruncatedOperator;
use crate::channel::{
    apply_channel_banded, channel_diagonal, default_output_degree, eval_poly, functional_tail_bound,
    functional_trace_banded, isometry_defect, ChannelParams,
};
use crate::disk::{DiskPoint, DiskQuadrature, RadialRule};
use crate::error::{Error, Result};
use crate::specfun::{binomial, channel_constant_sq, ln_beta, pochhammer};
use crate::spectral::{
    chained_kernel_integral, chained_kernel_quadrature2, eigen_relation_residual_with, BoundaryPoint, EIGEN_REFINE,
};
use crate::sum::Compensated;
use crate::transforms::{
    e_mu_k, husimi, husimi_integral, husimi_psi_integral, radial_poly_integral, radial_poly_power, toeplitz_operator,
    toeplitz_radial_diagonal, DiskFunction,
};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Constants,
    ChannelLimit,
    ToeplitzTrace,
    BerezinEigen,
    HusimiCheck,
    EIdentity,
    KernelChain,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Constants,
        Self::ChannelLimit,
        Self::ToeplitzTrace,
        Self::BerezinEigen,
        Self::HusimiCheck,
        Self::EIdentity,
        Self::KernelChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Constants => "constants",
            Self::ChannelLimit => "channel-limit",
            Self::ToeplitzTrace => "toeplitz-trace",
            Self::BerezinEigen => "berezin-eigen",
            Self::HusimiCheck => "husimi-check",
            Self::EIdentity => "e-identity",
            Self::KernelChain => "kernel-chain",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config {
                key: "experiment".into(),
                msg: format!("unknown experiment `{s}`"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputState {
    /// `ê_0 ⊗ ê_0*`.
    Lowest,
    /// Rank-`rank` positive state of trace one on degrees `<= state_degree`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config {
                key: "format".into(),
                msg: format!("expected csv or json, got `{s}`"),
            }),
        }
    }
}

/// Flat experiment description. Keys missing from a config file take the
/// per-experiment defaults of [`ExperimentConfig::defaults`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mu: f64,
    pub k: usize,
    pub nu_list: Vec<u64>,
    pub input_state: InputState,
    pub rank: usize,
    pub state_degree: usize,
    pub seed: u64,
    /// `ψ(x) = Σ psi[i] x^i`, `psi[0] = 0`.
    pub psi: Vec<f64>,
    /// `f = Σ f[i] (1-|z|²)^i`.
    pub f: Vec<f64>,
    /// Power `n` in `Tr(T_f^n)`.
    pub power: u32,
    /// Output truncation `L`; adaptive when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_degree: Option<usize>,
    pub radial_count: usize,
    pub angular_count: usize,
    pub lambda_list: Vec<f64>,
    pub sample_points: usize,
    pub sample_count: u64,
    pub chain_length: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_order: Option<f64>,
    pub order_tolerance: f64,
    /// Adaptive truncation stops once `tail_bound <= tail_tolerance`.
    pub tail_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let sweep = vec![50, 100, 200, 400, 800];
        let mut c = Self {
            experiment: kind,
            mu: 2.0,
            k: 0,
            nu_list: sweep,
            input_state: InputState::Lowest,
            rank: 3,
            state_degree: 6,
            seed: 1,
            psi: vec![0.0, 0.0, 1.0],
            f: vec![0.0, 0.0, 1.0],
            power: 2,
            output_degree: None,
            radial_count: 400,
            angular_count: 512,
            lambda_list: vec![0.0, 1.0, 2.0],
            sample_points: 20,
            sample_count: 1_000_000,
            chain_length: 2,
            tolerance: 0.02,
            expected_order: Some(-1.0),
            order_tolerance: 0.15,
            tail_tolerance: 1e-8,
            output: None,
            format: None,
            record_timing: true,
        };
        match kind {
            ExperimentKind::Constants => {
                c.k = 1;
                c.nu_list = vec![2, 3, 5, 8, 13];
                c.tolerance = 1e-12;
                c.expected_order = None;
            }
            ExperimentKind::ChannelLimit | ExperimentKind::ToeplitzTrace => {}
            ExperimentKind::BerezinEigen => {
                c.nu_list = vec![2, 4, 8];
                c.sample_points = 6;
                c.tolerance = 1e-6;
                c.expected_order = None;
            }
            ExperimentKind::HusimiCheck => {
                c.nu_list = vec![2, 3];
                c.k = 2;
                c.input_state = InputState::Random;
                c.tolerance = 1e-6;
                c.expected_order = None;
            }
            ExperimentKind::EIdentity => {
                c.k = 1;
                c.tolerance = 1e-6;
                c.order_tolerance = 0.2;
            }
            ExperimentKind::KernelChain => {
                c.nu_list = vec![4, 8, 16];
                c.radial_count = 80;
                c.angular_count = 512;
                c.tolerance = 1.0;
                c.expected_order = None;
            }
        }
        c
    }

    /// Parse a config file body. `kind` comes from the `experiment` key or,
    /// when absent, from `hint`; both present and different is an error.
    pub fn from_toml_str(text: &str, hint: Option<ExperimentKind>) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config {
            key: "<file>".into(),
            msg: e.message().to_string(),
        })?;
        let declared = match table.get("experiment") {
            None => None,
            Some(toml::Value::String(s)) => Some(s.parse::<ExperimentKind>()?),
            Some(_) => {
                return Err(Error::Config {
                    key: "experiment".into(),
                    msg: "expected a string".into(),
                })
            }
        };
        let kind = match (declared, hint) {
            (Some(d), Some(h)) if d != h => {
                return Err(Error::Config {
                    key: "experiment".into(),
                    msg: format!("config declares `{d}` but `{h}` was requested"),
                })
            }
            (Some(d), _) => d,
            (None, Some(h)) => h,
            (None, None) => {
                return Err(Error::Config {
                    key: "experiment".into(),
                    msg: "missing".into(),
                })
            }
        };
        let mut merged = toml::Table::try_from(Self::defaults(kind)).expect("defaults serialise");
        for (key, value) in table {
            merged.insert(key.clone(), value.clone());
            // type-check each key on its own so the diagnostic can name it
            let probe = merged.clone();
            if let Err(e) = toml::Value::Table(probe).try_into::<Self>() {
                return Err(Error::Config {
                    key,
                    msg: e.message().to_string(),
                });
            }
        }
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config {
                key: "<file>".into(),
                msg: e.message().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, hint: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, hint)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config { key: key.into(), msg });
        if self.nu_list.is_empty() {
            return bad("nu_list", "must not be empty".into());
        }
        if self.nu_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("nu_list", "must be strictly increasing".into());
        }
        if self.nu_list[0] < 2 {
            return bad("nu_list", "weights must be integers >= 2".into());
        }
        if !(self.mu > 1.0) || !self.mu.is_finite() {
            return bad("mu", format!("must be finite and > 1, got {}", self.mu));
        }
        if self.psi.is_empty() || self.psi[0] != 0.0 || self.psi.iter().any(|c| !c.is_finite()) {
            return bad("psi", "needs finite coefficients with psi[0] = 0".into());
        }
        if self.f.is_empty() || self.f.iter().all(|&c| c == 0.0) || self.f.iter().any(|c| !c.is_finite()) {
            return bad("f", "needs at least one finite nonzero coefficient".into());
        }
        for (key, v) in [
            ("tolerance", self.tolerance),
            ("order_tolerance", self.order_tolerance),
            ("tail_tolerance", self.tail_tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(key, format!("must be positive, got {v}"));
            }
        }
        if self.power == 0 {
            return bad("power", "must be at least 1".into());
        }
        if self.chain_length == 0 {
            return bad("chain_length", "must be at least 1".into());
        }
        if self.rank == 0 || self.rank > self.state_degree + 1 {
            return bad("rank", format!("must lie in 1..={}", self.state_degree + 1));
        }
        if self.radial_count == 0 || self.angular_count == 0 {
            return bad("radial_count", "quadrature counts must be positive".into());
        }
        if self.sample_points == 0 {
            return bad("sample_points", "must be positive".into());
        }
        if self.experiment == ExperimentKind::KernelChain && self.chain_length > 1 && self.sample_count < 2 {
            return bad("sample_count", "need at least two samples".into());
        }
        if self.lambda_list.iter().any(|l| !l.is_finite()) {
            return bad("lambda_list", "entries must be finite".into());
        }
        if self.output_degree == Some(0) {
            return bad("output_degree", "must be positive".into());
        }
        Ok(())
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub nu: u64,
    #[serde(with = "nan_as_null")]
    pub measured: f64,
    #[serde(with = "nan_as_null")]
    pub target: f64,
    #[serde(with = "nan_as_null")]
    pub abs_error: f64,
    #[serde(with = "nan_as_null")]
    pub tail_bound: f64,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "nan_as_null")]
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

/// Least-squares slope of `ln abs_error` against `ln nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub order: f64,
    pub std_error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    ClosedForm,
    Quadrature,
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub experiment: ExperimentKind,
    pub target_kind: TargetKind,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub fitted_order: Option<OrderFit>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Fit over rows with positive finite errors; `None` below four points.
pub fn fit_order(rows: &[Row]) -> Option<OrderFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error.is_none() && r.abs_error.is_finite() && r.abs_error > 0.0)
        .map(|r| ((r.nu as f64).ln(), r.abs_error.ln()))
        .collect();
    let n = pts.len();
    if n < 4 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    Some(OrderFit {
        order: slope,
        std_error: (ssr / (nf - 2.0) / sxx).sqrt(),
        points: n,
    })
}

struct RowValue {
    measured: f64,
    target: f64,
    tail: f64,
    output_degree: Option<usize>,
    checks: Vec<Check>,
}

impl RowValue {
    fn new(measured: f64, target: f64, tail: f64) -> Self {
        Self {
            measured,
            target,
            tail,
            output_degree: None,
            checks: Vec::new(),
        }
    }
}

/// Largest adaptive truncation before giving up on `tail_tolerance`.
const MAX_ADAPTIVE_DEGREE: usize = 1 << 23;
/// Same for non-diagonal inputs, whose band storage grows with the state degree.
const MAX_BANDED_DEGREE: usize = 1 << 18;

fn input_state(cfg: &ExperimentConfig, nu: f64) -> Result<TruncatedOperator> {
    match cfg.input_state {
        InputState::Lowest => TruncatedOperator::basis_projector(nu, 0, 0),
        InputState::Random => TruncatedOperator::random_state(nu, cfg.state_degree, cfg.rank, cfg.seed),
    }
}

fn sample_points(cfg: &ExperimentConfig, radius: f64) -> Vec<DiskPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.sample_points)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            DiskPoint::new(Complex64::from_polar(r, th)).expect("inside the disk")
        })
        .collect()
}

fn constants_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let k = cfg.k as u64;
    let measured = channel_constant_sq(cfg.mu, nu, k)?;
    // ‖(z-w)^k‖² = k! Σ_j C(k,j) / ((mu)_j (nu)_{k-j})
    let mut acc = Compensated::new();
    for j in 0..=k {
        acc.add(binomial(k, j) / (pochhammer(cfg.mu, j) * pochhammer(nu, k - j)));
    }
    let target = 1.0 / (pochhammer(1.0, k) * acc.value());
    let params = ChannelParams::new(cfg.mu, nu, cfg.k, 60)?;
    let defect = isometry_defect(&params, 60);
    let mut v = RowValue::new(measured, target, 0.0);
    v.checks.push(Check::at_most(
        format!("isometry defect nu={nu}"),
        defect,
        cfg.tolerance,
    ));
    Ok(v)
}

/// `∫ ψ(((mu)_k/k!) u^k (1-u)^mu) dι = Σ_i c_i ((mu)_k/k!)^i B(ik+1, i mu-1)`.
pub fn lowest_state_target(mu: f64, k: usize, psi: &[f64]) -> f64 {
    let w = pochhammer(mu, k as u64) / pochhammer(1.0, k as u64);
    let mut acc = Compensated::new();
    for (i, &c) in psi.iter().enumerate().skip(1) {
        if c != 0.0 {
            let fi = i as f64;
            acc.add(c * (fi * w.ln() + ln_beta(fi * k as f64 + 1.0, fi * mu - 1.0)).exp());
        }
    }
    acc.value()
}

fn channel_limit_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let a = input_state(cfg, cfg.mu)?;
    let tr_a = a.trace().re;
    let mut l = cfg.output_degree.unwrap_or_else(|| default_output_degree(nu, cfg.k));
    match cfg.input_state {
        InputState::Lowest => loop {
            // diagonal input gives diagonal output; d_p is decreasing once
            // p exceeds (k(nu+k-1) - mu)/mu, below every L used here
            let params = ChannelParams::new(cfg.mu, nu, cfg.k, l)?;
            let d = channel_diagonal(&a, &params)?;
            let mut part = Compensated::new();
            let mut mass = Compensated::new();
            for &x in &d {
                part.add(eval_poly(&cfg.psi, x));
                mass.add(x);
            }
            let tail_mass = params.trace_ratio() * tr_a - mass.value();
            let tail = functional_tail_bound(tail_mass, d[l], &cfg.psi) / nu;
            let done = cfg.output_degree.is_some() || tail <= cfg.tail_tolerance || 2 * l > MAX_ADAPTIVE_DEGREE;
            if done {
                let mut v = RowValue::new(part.value() / nu, lowest_state_target(cfg.mu, cfg.k, &cfg.psi), tail);
                v.output_degree = Some(l);
                return Ok(v);
            }
            l *= 2;
        },
        InputState::Random => {
            let target = husimi_psi_integral(&a, cfg.k, &cfg.psi)?;
            let slope: f64 = cfg.psi.iter().enumerate().map(|(i, c)| i as f64 * c.abs()).sum();
            loop {
                let params = ChannelParams::new(cfg.mu, nu, cfg.k, l)?;
                let b = apply_channel_banded(&a, &params)?;
                let part = functional_trace_banded(&b, &cfg.psi)?;
                let tail_mass = params.trace_ratio() * tr_a - b.trace();
                let tail = slope * tail_mass.max(0.0) / nu;
                if cfg.output_degree.is_some() || tail <= cfg.tail_tolerance || 2 * l > MAX_BANDED_DEGREE {
                    let mut v = RowValue::new(part / nu, target, tail);
                    v.output_degree = Some(l);
                    return Ok(v);
                }
                l *= 2;
            }
        }
    }
}

/// `Σ_{m>L} (Σ_i |c_i| (nu-1)_i/(nu+m)_i)^n` bounded via Minkowski and
/// `(nu+L)_i/(nu+m)_i <= (A/(A+m-L))^i`, `A = nu+L+i-1`.
fn toeplitz_power_tail(c: &[f64], nu: f64, l: usize, n: u32) -> f64 {
    let nf = n as f64;
    let mut root = 0.0;
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        let p = i as f64 * nf;
        if p <= 1.0 {
            return f64::INFINITY;
        }
        let x_l = ci.abs() * pochhammer(nu - 1.0, i as u64) / pochhammer(nu + l as f64, i as u64);
        let a = nu + l as f64 + i as f64 - 1.0;
        root += x_l * (a / (p - 1.0)).powf(1.0 / nf);
    }
    root.powi(n as i32)
}

fn toeplitz_trace_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let target = radial_poly_integral(&radial_poly_power(&cfg.f, cfg.power as usize))?;
    let mut l = cfg.output_degree.unwrap_or_else(|| default_output_degree(nu, 0));
    loop {
        let mut acc = Compensated::new();
        for x in toeplitz_radial_diagonal(&cfg.f, nu, l) {
            acc.add(x.powi(cfg.power as i32));
        }
        let tail = toeplitz_power_tail(&cfg.f, nu, l, cfg.power) / (nu - 1.0);
        if cfg.output_degree.is_some() || tail <= cfg.tail_tolerance || 2 * l > MAX_ADAPTIVE_DEGREE {
            let mut v = RowValue::new(acc.value() / (nu - 1.0), target, tail);
            v.output_degree = Some(l);
            return Ok(v);
        }
        l *= 2;
    }
}

fn berezin_eigen_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let q = DiskQuadrature::with_rule(cfg.radial_count, cfg.angular_count, nu + 0.5, RadialRule::Jacobi)?
        .with_boundary_refinement(EIGEN_REFINE.0, EIGEN_REFINE.1);
    let samples = sample_points(cfg, 0.7);
    let b = BoundaryPoint::from_angle(0.4);
    let mut worst: f64 = 0.0;
    let mut v = RowValue::new(0.0, 0.0, 0.0);
    for &lambda in &cfg.lambda_list {
        let r = eigen_relation_residual_with(nu, lambda, b, &samples, &q)?;
        v.checks.push(Check::at_most(
            format!("eigen residual nu={nu} lambda={lambda}"),
            r,
            cfg.tolerance,
        ));
        worst = worst.max(r);
    }
    v.measured = worst;
    Ok(v)
}

fn husimi_check_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let a = input_state(cfg, nu)?;
    let tr = a.trace().re;
    let mut worst = (0.0, tr);
    for i in 0..=cfg.k {
        let val = (nu - 1.0) * husimi_integral(&a, i)?;
        if (val - tr).abs() >= (worst.1 - tr).abs() {
            worst = (i as f64, val);
        }
    }
    Ok(RowValue::new(worst.1, tr, 0.0))
}

fn e_identity_row(cfg: &ExperimentConfig, nu: f64, samples: &[DiskPoint]) -> Result<RowValue> {
    let f = DiskFunction::radial_poly(cfg.f.clone());
    let mut sup: f64 = 0.0;
    for p in samples {
        let e = e_mu_k(&f, cfg.mu, cfg.k, p.z(), None)?;
        let en = e_mu_k(&f, cfg.mu, cfg.k, p.z(), Some(nu))?;
        sup = sup.max((en - e).norm());
    }
    Ok(RowValue::new(sup, 0.0, 0.0))
}

/// `max_z |E_{mu,k}(f)(z) - H_mu^k(R_mu*(f))(z)|` with `R_mu* f = T_f/(mu-1)`.
fn e_identity_check(cfg: &ExperimentConfig, samples: &[DiskPoint]) -> Result<f64> {
    let f = DiskFunction::radial_poly(cfg.f.clone());
    let n = cfg.output_degree.unwrap_or(600);
    let mut r = toeplitz_operator(&f, cfg.mu, n)?;
    r.matrix /= Complex64::new(cfg.mu - 1.0, 0.0);
    let mut worst: f64 = 0.0;
    for p in samples {
        let e = e_mu_k(&f, cfg.mu, cfg.k, p.z(), None)?;
        let h = husimi(&r, cfg.k, p.z())?;
        worst = worst.max((e - h).norm());
    }
    Ok(worst)
}

fn kernel_chain_row(cfg: &ExperimentConfig, nu: f64) -> Result<RowValue> {
    let n = cfg.chain_length;
    let mc = chained_kernel_integral(n, nu, cfg.seed, cfg.sample_count)?;
    let bound = 9f64.powi(n as i32);
    let target = match n {
        1 => 1.0,
        2 => chained_kernel_quadrature2(nu, cfg.radial_count, cfg.angular_count)?,
        _ => bound,
    };
    let mut v = RowValue::new(mc.estimate, target, mc.half_width);
    if nu >= 4.0 {
        v.checks.push(Check::at_most(
            format!("estimate + half-width <= 9^n at nu={nu}"),
            mc.estimate + mc.half_width,
            bound,
        ));
    }
    if n == 1 {
        v.checks.push(Check::at_most(
            "n = 1 is exact".to_string(),
            (mc.estimate - 1.0).abs(),
            0.0,
        ));
    }
    Ok(v)
}

fn target_kind(cfg: &ExperimentConfig) -> TargetKind {
    match cfg.experiment {
        ExperimentKind::ChannelLimit if cfg.input_state == InputState::Random => TargetKind::Quadrature,
        ExperimentKind::KernelChain if cfg.chain_length == 2 => TargetKind::Quadrature,
        ExperimentKind::KernelChain if cfg.chain_length > 2 => TargetKind::Bound,
        _ => TargetKind::ClosedForm,
    }
}

/// Rows whose abs_error is held to `tolerance`: all of them for exact
/// identities, only the largest weight for limit sweeps.
fn tolerance_applies(kind: ExperimentKind, index: usize, len: usize) -> bool {
    match kind {
        ExperimentKind::ChannelLimit | ExperimentKind::ToeplitzTrace => index + 1 == len,
        ExperimentKind::EIdentity | ExperimentKind::KernelChain => false,
        _ => true,
    }
}

/// Weight from which the kernel-chain Monte Carlo must agree with the
/// tensor quadrature within its half-width.
pub const KERNEL_CHAIN_AGREEMENT_NU: u64 = 16;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let e_samples = sample_points(cfg, 0.8);
    let results: Vec<(Row, Vec<Check>)> = cfg
        .nu_list
        .par_iter()
        .map(|&nu_int| {
            let nu = nu_int as f64;
            let start = Instant::now();
            let value = match cfg.experiment {
                ExperimentKind::Constants => constants_row(cfg, nu),
                ExperimentKind::ChannelLimit => channel_limit_row(cfg, nu),
                ExperimentKind::ToeplitzTrace => toeplitz_trace_row(cfg, nu),
                ExperimentKind::BerezinEigen => berezin_eigen_row(cfg, nu),
                ExperimentKind::HusimiCheck => husimi_check_row(cfg, nu),
                ExperimentKind::EIdentity => e_identity_row(cfg, nu, &e_samples),
                ExperimentKind::KernelChain => kernel_chain_row(cfg, nu),
            };
            let seconds = if cfg.record_timing {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            match value {
                Ok(v) => (
                    Row {
                        nu: nu_int,
                        measured: v.measured,
                        target: v.target,
                        abs_error: (v.measured - v.target).abs(),
                        tail_bound: v.tail,
                        seconds,
                        output_degree: v.output_degree,
                        error: None,
                    },
                    v.checks,
                ),
                Err(e) => (
                    Row {
                        nu: nu_int,
                        measured: f64::NAN,
                        target: f64::NAN,
                        abs_error: f64::NAN,
                        tail_bound: f64::NAN,
                        seconds,
                        output_degree: None,
                        error: Some(e.to_string()),
                    },
                    Vec::new(),
                ),
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut checks = Vec::new();
    for (r, c) in results {
        rows.push(r);
        checks.extend(c);
    }
    let len = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.error.is_some() {
            checks.push(Check {
                name: format!("row nu={} completed", r.nu),
                value: f64::NAN,
                threshold: 0.0,
                passed: false,
            });
        } else if tolerance_applies(cfg.experiment, i, len) {
            checks.push(Check::at_most(
                format!("abs_error nu={}", r.nu),
                r.abs_error,
                cfg.tolerance,
            ));
        }
    }
    match cfg.experiment {
        ExperimentKind::EIdentity => {
            let name = "E_{mu,k}(f) vs H^k(R*(f))".to_string();
            match e_identity_check(cfg, &e_samples) {
                Ok(v) => checks.push(Check::at_most(name, v, cfg.tolerance)),
                Err(e) => checks.push(Check {
                    name: format!("{name}: {e}"),
                    value: f64::NAN,
                    threshold: cfg.tolerance,
                    passed: false,
                }),
            }
        }
        ExperimentKind::KernelChain if cfg.chain_length == 2 => {
            for r in rows
                .iter()
                .filter(|r| r.error.is_none() && r.nu >= KERNEL_CHAIN_AGREEMENT_NU)
            {
                checks.push(Check::at_most(
                    format!("monte carlo vs quadrature nu={}", r.nu),
                    r.abs_error,
                    r.tail_bound,
                ));
            }
        }
        _ => {}
    }
    let fitted_order = fit_order(&rows);
    if let (Some(expected), Some(fit)) = (cfg.expected_order, fitted_order) {
        checks.push(Check::at_most(
            "fitted order",
            (fit.order - expected).abs(),
            cfg.order_tolerance,
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment,
        target_kind: target_kind(cfg),
        config: cfg.clone(),
        rows,
        fitted_order,
        checks,
        passed,
    })
}

pub const CSV_HEADER: &str = "nu,measured,target,abs_error,tail_bound,seconds";

pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{:?},{:?}\n",
            r.nu, r.measured, r.target, r.abs_error, r.tail_bound, r.seconds
        ));
    }
    out
}

pub fn report_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

pub fn render_report(report: &ExperimentReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => report_csv(report),
        OutputFormat::Json => report_json(report),
    }
}

/// Write to `path`, or stdout when `None`.
pub fn emit_report(report: &ExperimentReport, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let body = render_report(report, format);
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Format from the extension of `path`, csv otherwise.
pub fn format_for_path(path: Option<&Path>) -> OutputFormat {
    match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    }
}

pub fn parse_report_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Config {
        key: "<report>".into(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(kind);
        c.record_timing = false;
        c
    }

    #[test]
    fn config_rejects_unknown_and_bad_keys() {
        let e = ExperimentConfig::from_toml_str("experiment = \"constants\"\nbogus = 1\n", None).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "bogus"), "{e}");
        let e = ExperimentConfig::from_toml_str("nu_list = [5, 3]\n", Some(ExperimentKind::Constants)).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "nu_list"));
        let e = ExperimentConfig::from_toml_str("psi = [1.0, 1.0]\n", Some(ExperimentKind::ChannelLimit)).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "psi"));
        let e = ExperimentConfig::from_toml_str("mu = \"two\"\n", Some(ExperimentKind::ChannelLimit)).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "mu"), "{e}");
        let e = ExperimentConfig::from_toml_str("experiment = \"constants\"\n", Some(ExperimentKind::KernelChain))
            .unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "experiment"));
        let e = ExperimentConfig::from_toml_str("tolerance = 0.0\n", Some(ExperimentKind::Constants)).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "tolerance"));
    }

    #[test]
    fn config_round_trips_through_toml() {
        for kind in ExperimentKind::ALL {
            let c = ExperimentConfig::defaults(kind);
            let back = ExperimentConfig::from_toml_str(&c.to_toml_string(), None).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn lowest_state_targets() {
        assert!((lowest_state_target(2.0, 0, &[0.0, 0.0, 1.0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((lowest_state_target(2.0, 1, &[0.0, 0.0, 1.0]) - 2.0 / 15.0).abs() < 1e-15);
        // ψ = x: ∫H dι = 1/(mu-1)
        assert!((lowest_state_target(3.0, 2, &[0.0, 1.0]) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn toeplitz_tail_bounds_the_remainder() {
        let c = [0.0, 0.0, 1.0];
        let (nu, l) = (20.0, 100usize);
        let exact: f64 = (l + 1..2_000_000)
            .map(|m| {
                let m = m as f64;
                ((nu - 1.0) * nu / ((nu + m) * (nu + m + 1.0))).powi(2)
            })
            .sum();
        let bound = toeplitz_power_tail(&c, nu, l, 2);
        assert!(bound >= exact && bound <= 1.1 * exact, "{bound} vs {exact}");
    }

    #[test]
    fn constants_report_is_deterministic() {
        let c = quick(ExperimentKind::Constants);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert!(a.passed);
        assert_eq!(report_csv(&a), report_csv(&b));
        assert_eq!(report_json(&a), report_json(&b));
        let back = parse_report_json(&report_json(&a)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn csv_shapes() {
        let mut r = run_experiment(&quick(ExperimentKind::Constants)).unwrap();
        r.rows.truncate(1);
        assert_eq!(report_csv(&r).lines().count(), 2);
        r.rows.clear();
        assert_eq!(report_csv(&r), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn failed_rows_are_recorded() {
        let mut c = quick(ExperimentKind::ToeplitzTrace);
        c.f = vec![1.0];
        c.nu_list = vec![3, 4];
        let r = run_experiment(&c).unwrap();
        assert!(r.rows.iter().all(|r| r.error.is_some() && r.measured.is_nan()));
        assert!(!r.passed);
        let back = parse_report_json(&report_json(&r)).unwrap();
        assert_eq!(back.rows.len(), 2);
        assert!(back.rows[0].measured.is_nan());
    }

    #[test]
    fn channel_tail_covers_truncation() {
        for state in [InputState::Lowest, InputState::Random] {
            let mut c = quick(ExperimentKind::ChannelLimit);
            c.mu = 3.0;
            c.k = 1;
            c.nu_list = vec![10];
            c.input_state = state;
            c.state_degree = 4;
            c.output_degree = Some(60);
            let short = run_experiment(&c).unwrap().rows[0].clone();
            c.output_degree = Some(600);
            let long = run_experiment(&c).unwrap().rows[0].clone();
            assert!(short.measured <= long.measured + 1e-15);
            assert!(
                long.measured - short.measured <= short.tail_bound,
                "{state:?}: {short:?} {long:?}"
            );
        }
    }

    #[test]
    fn fit_recovers_slope() {
        let rows: Vec<Row> = [10u64, 20, 40, 80]
            .iter()
            .map(|&nu| Row {
                nu,
                measured: 0.0,
                target: 0.0,
                abs_error: 3.0 / nu as f64,
                tail_bound: 0.0,
                seconds: 0.0,
                output_degree: None,
                error: None,
            })
            .collect();
        let f = fit_order(&rows).unwrap();
        assert!((f.order + 1.0).abs() < 1e-12 && f.std_error < 1e-12);
        assert!(fit_order(&rows[..3]).is_none());
    }
}
