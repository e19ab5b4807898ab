//! Hermitian metric fields g_{i\bar j}(p) on domains in C^n and their 2-jets.
//!
//! Derivatives follow the Wirtinger convention
//! d/dz = (d/dx - i d/dy)/2, d/dz̄ = (d/dx + i d/dy)/2.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Margin kept between a domain point and a singular locus.
pub const HOPF_MIN_RADIUS: f64 = 0.05;
pub const TRICERRI_MIN_IM: f64 = 0.05;
/// Bounds of the single fundamental-domain chart used for the Tricerri metric.
pub const TRICERRI_CHART_BOUND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point { coords }
    }

    pub fn real(xs: &[f64]) -> Self {
        Point { coords: xs.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn origin(n: usize) -> Self {
        Point { coords: vec![ZERO; n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Shift the real coordinate `axis` (2k = Re z_k, 2k+1 = Im z_k) by `t`.
    fn shifted(&self, axis: usize, t: f64) -> Point {
        let mut q = self.clone();
        let k = axis / 2;
        if axis.is_multiple_of(2) {
            q.coords[k].re += t;
        } else {
            q.coords[k].im += t;
        }
        q
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// Scalar conformal factors phi with g = phi * I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConformalFactor {
    /// phi = exp(s |z|^2)
    ExpNormSq { scale: f64 },
    /// phi = 1 + s |z|^2, s >= 0
    OnePlusNormSq { scale: f64 },
}

impl ConformalFactor {
    fn value(&self, z: &[Complex64]) -> f64 {
        let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        match *self {
            ConformalFactor::ExpNormSq { scale } => (scale * r2).exp(),
            ConformalFactor::OnePlusNormSq { scale } => 1.0 + scale * r2,
        }
    }

    /// d phi / d z_i
    fn d(&self, z: &[Complex64], i: usize) -> Complex64 {
        match *self {
            ConformalFactor::ExpNormSq { scale } => z[i].conj() * (scale * self.value(z)),
            ConformalFactor::OnePlusNormSq { scale } => z[i].conj() * scale,
        }
    }

    /// d^2 phi / d z_i d z̄_j
    fn dd(&self, z: &[Complex64], i: usize, j: usize) -> Complex64 {
        let delta = if i == j { 1.0 } else { 0.0 };
        match *self {
            ConformalFactor::ExpNormSq { scale } => {
                (Complex64::new(scale * delta, 0.0) + z[i].conj() * z[j] * (scale * scale)) * self.value(z)
            }
            ConformalFactor::OnePlusNormSq { scale } => Complex64::new(scale * delta, 0.0),
        }
    }
}

/// Catalog of metrics with closed-form jets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum MetricSpec {
    Euclidean { n: usize },
    Conformal { n: usize, factor: ConformalFactor },
    /// g = 4 delta_ij / |z|^2 on C^2 minus a ball, |z| > 0.05.
    Hopf,
    /// g = dd̄ log(1 + |w|^2) in the affine chart of P^n.
    FubiniStudy { n: usize },
    /// Coordinates (z, w), g = diag(Im w, 1/(Im w)^2), Im w > 0.05 in a bounded chart.
    Tricerri,
}

impl MetricSpec {
    /// Builds a spec from a catalog identifier. `dim` is required for the
    /// dimension-free entries and must equal 2 (or be absent) for hopf/tricerri.
    pub fn from_name(name: &str, dim: Option<usize>, scale: Option<f64>) -> Result<Self> {
        let need_dim = |default: usize| -> Result<usize> {
            let n = dim.unwrap_or(default);
            if n == 0 || n > 8 {
                return Err(Error::usage(format!("dimension {n} out of range 1..=8")));
            }
            Ok(n)
        };
        let fixed_two = || -> Result<()> {
            match dim {
                Some(n) if n != 2 => Err(Error::usage(format!("metric `{name}` is two-dimensional, got --dim {n}"))),
                _ => Ok(()),
            }
        };
        match name {
            "euclidean" => Ok(MetricSpec::Euclidean { n: need_dim(2)? }),
            "fubini_study" => Ok(MetricSpec::FubiniStudy { n: need_dim(2)? }),
            "hopf" => fixed_two().map(|_| MetricSpec::Hopf),
            "tricerri" => fixed_two().map(|_| MetricSpec::Tricerri),
            "conformal_exp" => Ok(MetricSpec::Conformal {
                n: need_dim(2)?,
                factor: ConformalFactor::ExpNormSq { scale: scale.unwrap_or(1.0) },
            }),
            "conformal_poly" => {
                let s = scale.unwrap_or(1.0);
                if s < 0.0 {
                    return Err(Error::usage("conformal_poly requires a non-negative scale"));
                }
                Ok(MetricSpec::Conformal { n: need_dim(2)?, factor: ConformalFactor::OnePlusNormSq { scale: s } })
            }
            other => Err(Error::Unknown(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::Euclidean { .. } => "euclidean",
            MetricSpec::Conformal { factor: ConformalFactor::ExpNormSq { .. }, .. } => "conformal_exp",
            MetricSpec::Conformal { factor: ConformalFactor::OnePlusNormSq { .. }, .. } => "conformal_poly",
            MetricSpec::Hopf => "hopf",
            MetricSpec::FubiniStudy { .. } => "fubini_study",
            MetricSpec::Tricerri => "tricerri",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            MetricSpec::Euclidean { n } | MetricSpec::Conformal { n, .. } | MetricSpec::FubiniStudy { n } => n,
            MetricSpec::Hopf | MetricSpec::Tricerri => 2,
        }
    }
}

pub type EvalFn = dyn Fn(&Point) -> ComplexMatrix + Send + Sync;
pub type DomainFn = dyn Fn(&Point) -> bool + Send + Sync;

#[derive(Clone)]
enum Source {
    Catalog(MetricSpec),
    Custom { eval: Arc<EvalFn>, domain: Arc<DomainFn> },
}

/// A Hermitian metric field. Catalog entries carry closed-form jets; custom
/// fields are differentiated numerically.
#[derive(Clone)]
pub struct MetricField {
    n: usize,
    name: String,
    source: Source,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField").field("n", &self.n).field("name", &self.name).finish()
    }
}

pub fn make_metric(spec: &MetricSpec) -> Result<MetricField> {
    let n = spec.dim();
    if n == 0 || n > 8 {
        return Err(Error::usage(format!("dimension {n} out of range 1..=8")));
    }
    if let MetricSpec::Conformal { factor: ConformalFactor::OnePlusNormSq { scale }, .. } = spec {
        if *scale < 0.0 {
            return Err(Error::usage("conformal_poly requires a non-negative scale"));
        }
    }
    Ok(MetricField { n, name: spec.name().to_string(), source: Source::Catalog(spec.clone()) })
}

impl MetricField {
    /// A field given by an arbitrary evaluator and domain predicate.
    pub fn custom<F, D>(name: &str, n: usize, eval: F, domain: D) -> Self
    where
        F: Fn(&Point) -> ComplexMatrix + Send + Sync + 'static,
        D: Fn(&Point) -> bool + Send + Sync + 'static,
    {
        MetricField {
            n,
            name: name.to_string(),
            source: Source::Custom { eval: Arc::new(eval), domain: Arc::new(domain) },
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> Option<&MetricSpec> {
        match &self.source {
            Source::Catalog(s) => Some(s),
            Source::Custom { .. } => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.source, Source::Catalog(_))
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.n || !p.is_finite() {
            return false;
        }
        match &self.source {
            Source::Catalog(spec) => match spec {
                MetricSpec::Hopf => p.norm() > HOPF_MIN_RADIUS,
                MetricSpec::Tricerri => {
                    let (z, w) = (p.coords[0], p.coords[1]);
                    w.im > TRICERRI_MIN_IM
                        && w.im <= TRICERRI_CHART_BOUND
                        && w.re.abs() <= TRICERRI_CHART_BOUND
                        && z.norm() <= TRICERRI_CHART_BOUND
                }
                _ => true,
            },
            Source::Custom { domain, .. } => domain(p),
        }
    }

    pub fn check_domain(&self, p: &Point) -> Result<()> {
        if p.dim() != self.n {
            return Err(Error::Dimension { expected: self.n, got: p.dim() });
        }
        if !self.contains(p) {
            return Err(Error::domain(format!("point {p} lies outside the domain of `{}`", self.name)));
        }
        Ok(())
    }

    /// g_{i\bar j}(p).
    pub fn evaluate(&self, p: &Point) -> Result<HermitianMatrix> {
        self.check_domain(p)?;
        let m = match &self.source {
            Source::Catalog(spec) => catalog_metric(spec, &p.coords),
            Source::Custom { eval, .. } => eval(p),
        };
        HermitianMatrix::new(m)
    }

    fn closed_jet(&self, p: &Point) -> Option<Result<MetricJet>> {
        match &self.source {
            Source::Catalog(spec) => Some(self.evaluate(p).map(|g| catalog_jet(spec, &p.coords, g))),
            Source::Custom { .. } => None,
        }
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn catalog_metric(spec: &MetricSpec, z: &[Complex64]) -> ComplexMatrix {
    let n = z.len();
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    match spec {
        MetricSpec::Euclidean { .. } => ComplexMatrix::identity(n, n),
        MetricSpec::Conformal { factor, .. } => ComplexMatrix::identity(n, n) * Complex64::new(factor.value(z), 0.0),
        MetricSpec::Hopf => ComplexMatrix::identity(n, n) * Complex64::new(4.0 / r2, 0.0),
        MetricSpec::FubiniStudy { .. } => {
            let s = 1.0 + r2;
            ComplexMatrix::from_fn(n, n, |k, l| Complex64::new(delta(k, l) / s, 0.0) - z[k].conj() * z[l] / (s * s))
        }
        MetricSpec::Tricerri => {
            let y = z[1].im;
            let mut g = ComplexMatrix::zeros(2, 2);
            g[(0, 0)] = Complex64::new(y, 0.0);
            g[(1, 1)] = Complex64::new(1.0 / (y * y), 0.0);
            g
        }
    }
}

fn catalog_jet(spec: &MetricSpec, z: &[Complex64], g: HermitianMatrix) -> MetricJet {
    let n = z.len();
    let mut jet = MetricJet::zeros(g);
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    match spec {
        MetricSpec::Euclidean { .. } => {}
        MetricSpec::Conformal { factor, .. } => {
            for i in 0..n {
                let d = factor.d(z, i);
                for k in 0..n {
                    jet.set_dg(i, k, k, d);
                }
                for j in 0..n {
                    let dd = factor.dd(z, i, j);
                    for k in 0..n {
                        jet.set_ddg(i, j, k, k, dd);
                    }
                }
            }
        }
        MetricSpec::Hopf => {
            // g = 4/r^2: d_i g = -4 z̄_i / r^4, d_i d_j̄ g = -4 (delta_ij / r^4 - 2 z̄_i z_j / r^6)
            let r4 = r2 * r2;
            let r6 = r4 * r2;
            for i in 0..n {
                let d = z[i].conj() * (-4.0 / r4);
                for k in 0..n {
                    jet.set_dg(i, k, k, d);
                }
                for j in 0..n {
                    let dd = (Complex64::new(delta(i, j) / r4, 0.0) - z[i].conj() * z[j] * (2.0 / r6)) * -4.0;
                    for k in 0..n {
                        jet.set_ddg(i, j, k, k, dd);
                    }
                }
            }
        }
        MetricSpec::FubiniStudy { .. } => {
            let s = 1.0 + r2;
            let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
            let zb = |i: usize| z[i].conj();
            for i in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = zb(i) * (-delta(k, l) / s2) - zb(k) * (delta(i, l) / s2) + zb(i) * zb(k) * z[l] * (2.0 / s3);
                        jet.set_dg(i, k, l, d);
                        for j in 0..n {
                            let t1 = -(Complex64::new(delta(i, j) / s2, 0.0) - zb(i) * z[j] * (2.0 / s3)) * delta(k, l);
                            let t2 = -(Complex64::new(delta(k, j) / s2, 0.0) - zb(k) * z[j] * (2.0 / s3)) * delta(i, l);
                            let t3 = ((zb(k) * delta(i, j) + zb(i) * delta(k, j)) * z[l] * (2.0 / s3))
                                - zb(i) * zb(k) * z[l] * z[j] * (6.0 / s4);
                            jet.set_ddg(i, j, k, l, t1 + t2 + t3);
                        }
                    }
                }
            }
        }
        MetricSpec::Tricerri => {
            let y = z[1].im;
            // d_w y = -i/2, d_w d_w̄ f(y) = f''(y)/4
            jet.set_dg(1, 0, 0, -I * 0.5);
            jet.set_dg(1, 1, 1, I / (y * y * y));
            jet.set_ddg(1, 1, 1, 1, Complex64::new(1.5 / y.powi(4), 0.0));
        }
    }
    jet
}

/// Metric value with first and mixed second Wirtinger derivatives at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricJet {
    pub g: HermitianMatrix,
    /// dg[(i n + k) n + l] = d/dz_i g_{k\bar l}
    dg: Vec<Complex64>,
    /// ddg[((i n + j) n + k) n + l] = d^2/dz_i dz̄_j g_{k\bar l}
    ddg: Vec<Complex64>,
}

impl MetricJet {
    pub fn zeros(g: HermitianMatrix) -> Self {
        let n = g.dim();
        MetricJet { g, dg: vec![ZERO; n * n * n], ddg: vec![ZERO; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn dg(&self, i: usize, k: usize, l: usize) -> Complex64 {
        let n = self.dim();
        self.dg[(i * n + k) * n + l]
    }

    pub fn ddg(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        let n = self.dim();
        self.ddg[((i * n + j) * n + k) * n + l]
    }

    pub fn set_dg(&mut self, i: usize, k: usize, l: usize, v: Complex64) {
        let n = self.dim();
        self.dg[(i * n + k) * n + l] = v;
    }

    pub fn set_ddg(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let n = self.dim();
        self.ddg[((i * n + j) * n + k) * n + l] = v;
    }

    /// d/dz̄_j g_{k\bar l} = conj(d/dz_j g_{l\bar k}).
    pub fn dbar_g(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.dg(j, l, k).conj()
    }

    /// max |conj(DDg[i][j][k][l]) - DDg[j][i][l][k]|, zero for a real metric.
    pub fn reality_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        r = r.max((self.ddg(i, j, k, l).conj() - self.ddg(j, i, l, k)).norm());
                    }
                }
            }
        }
        r
    }

    /// Largest entrywise difference of first and second derivatives, relative
    /// to max(1, largest entry of `other`).
    pub fn max_relative_difference(&self, other: &MetricJet) -> f64 {
        let scale = other
            .dg
            .iter()
            .chain(other.ddg.iter())
            .map(|z| z.norm())
            .fold(1.0, f64::max);
        self.dg
            .iter()
            .zip(&other.dg)
            .chain(self.ddg.iter().zip(&other.ddg))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

/// Finite-difference settings. The effective step is `h * max(1, |p|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub h: f64,
    /// Combine steps h and h/2 to cancel the O(h^2) error term.
    pub richardson: bool,
    /// Use finite differences even when a closed form is available.
    pub force: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: Tolerances::default().fd_step, richardson: false, force: false }
    }
}

impl FdConfig {
    pub fn with_step(h: f64) -> Self {
        FdConfig { h, ..Default::default() }
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }

    pub fn richardson(mut self) -> Self {
        self.richardson = true;
        self
    }
}

/// Jet of `field` at `p`: closed form when available (and not forced off),
/// central finite differences otherwise.
pub fn jet_at(field: &MetricField, p: &Point, fd: &FdConfig) -> Result<MetricJet> {
    field.check_domain(p)?;
    if !fd.force {
        if let Some(jet) = field.closed_jet(p) {
            return jet;
        }
    }
    finite_difference_jet(|q| field.evaluate(q), p, fd)
}

/// Central-difference Wirtinger jet of an arbitrary metric evaluator. Mixed
/// second derivatives are nested first differences over the 2n real axes.
pub fn finite_difference_jet<F>(evaluate: F, p: &Point, fd: &FdConfig) -> Result<MetricJet>
where
    F: Fn(&Point) -> Result<HermitianMatrix>,
{
    if !(fd.h.is_finite() && fd.h >= Tolerances::default().min_fd_step) {
        return Err(Error::usage(format!(
            "finite-difference step {:e} is below {:e}; cancellation would dominate",
            fd.h,
            Tolerances::default().min_fd_step
        )));
    }
    let h = fd.h * p.norm().max(1.0);
    let g = evaluate(p)?;
    let eval = |q: &Point| -> Result<ComplexMatrix> {
        evaluate(q).map(HermitianMatrix::into_inner).map_err(|e| match e {
            Error::Domain(msg) => Error::domain(format!("finite-difference stencil point {q} is invalid: {msg}")),
            other => other,
        })
    };
    let coarse = fd_derivatives(&eval, p, h)?;
    let (dg, ddg) = if fd.richardson {
        let fine = fd_derivatives(&eval, p, h / 2.0)?;
        let extrapolate = |c: &[Complex64], f: &[Complex64]| -> Vec<Complex64> {
            c.iter().zip(f).map(|(c, f)| (f * 4.0 - c) / 3.0).collect()
        };
        (extrapolate(&coarse.0, &fine.0), extrapolate(&coarse.1, &fine.1))
    } else {
        coarse
    };
    Ok(MetricJet { g, dg, ddg })
}

type Derivs = (Vec<Complex64>, Vec<Complex64>);

fn fd_derivatives<F>(eval: &F, p: &Point, h: f64) -> Result<Derivs>
where
    F: Fn(&Point) -> Result<ComplexMatrix>,
{
    let n = p.dim();
    let m = 2 * n;
    let g0 = eval(p)?;
    // first derivatives along each real axis
    let mut first = Vec::with_capacity(m);
    for a in 0..m {
        let plus = eval(&p.shifted(a, h))?;
        let minus = eval(&p.shifted(a, -h))?;
        first.push((plus - minus) / Complex64::new(2.0 * h, 0.0));
    }
    // real Hessian blocks H[a][b] (matrix valued)
    let mut hess: Vec<Vec<ComplexMatrix>> = vec![vec![ComplexMatrix::zeros(n, n); m]; m];
    for a in 0..m {
        let pp = eval(&p.shifted(a, 2.0 * h))?;
        let mm = eval(&p.shifted(a, -2.0 * h))?;
        hess[a][a] = (pp - &g0 * Complex64::new(2.0, 0.0) + mm) / Complex64::new(4.0 * h * h, 0.0);
        for b in (a + 1)..m {
            let pp = eval(&p.shifted(a, h).shifted(b, h))?;
            let pm = eval(&p.shifted(a, h).shifted(b, -h))?;
            let mp = eval(&p.shifted(a, -h).shifted(b, h))?;
            let mm = eval(&p.shifted(a, -h).shifted(b, -h))?;
            let v = (pp - pm - mp + mm) / Complex64::new(4.0 * h * h, 0.0);
            hess[b][a] = v.clone();
            hess[a][b] = v;
        }
    }
    let mut dg = vec![ZERO; n * n * n];
    let mut ddg = vec![ZERO; n * n * n * n];
    for i in 0..n {
        let (xi, yi) = (2 * i, 2 * i + 1);
        for k in 0..n {
            for l in 0..n {
                dg[(i * n + k) * n + l] = (first[xi][(k, l)] - I * first[yi][(k, l)]) * 0.5;
            }
        }
        for j in 0..n {
            let (xj, yj) = (2 * j, 2 * j + 1);
            for k in 0..n {
                for l in 0..n {
                    let v = hess[xi][xj][(k, l)] + hess[yi][yj][(k, l)] + I * (hess[xi][yj][(k, l)] - hess[yi][xj][(k, l)]);
                    ddg[((i * n + j) * n + k) * n + l] = v * 0.25;
                }
            }
        }
    }
    Ok((dg, ddg))
}
