//! Chern curvature tensors R_{i\bar j k\bar l}, frame changes and contractions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_frame, hermitian_residual, ComplexMatrix, HermitianMatrix, UnitaryMatrix};
use crate::metric::MetricJet;
use crate::rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum Basis {
    /// Components in holomorphic coordinates, with the metric at the point.
    Coordinate { g: HermitianMatrix },
    /// Components in a unitary frame (metric = identity).
    Frame,
}

/// Dense n^4 storage of R_{i\bar j k\bar l}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernTensor {
    n: usize,
    data: Vec<Complex64>,
    basis: Basis,
}

impl ChernTensor {
    pub fn zeros(n: usize, basis: Basis) -> Self {
        ChernTensor { n, data: vec![ZERO; n * n * n * n], basis }
    }

    pub fn zero_frame(n: usize) -> Self {
        Self::zeros(n, Basis::Frame)
    }

    pub fn from_fn<F>(n: usize, basis: Basis, mut f: F) -> Self
    where
        F: FnMut(usize, usize, usize, usize) -> Complex64,
    {
        let mut t = Self::zeros(n, basis);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = f(i, j, k, l);
                        t.set(i, j, k, l, v);
                    }
                }
            }
        }
        t
    }

    /// Frame tensor from raw components; rejects data violating Hermitian symmetry.
    pub fn frame_from_data(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n * n * n {
            return Err(Error::Dimension { expected: n * n * n * n, got: data.len() });
        }
        let t = ChernTensor { n, data, basis: Basis::Frame };
        t.check_symmetry()?;
        Ok(t)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn is_frame(&self) -> bool {
        matches!(self.basis, Basis::Frame)
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: Complex64) {
        let x = self.idx(i, j, k, l);
        self.data[x] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// max |conj R_{ijkl} - R_{jilk}|.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.n;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        r = r.max((self.get(i, j, k, l).conj() - self.get(j, i, l, k)).norm());
                    }
                }
            }
        }
        r
    }

    pub fn check_symmetry(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::domain("curvature tensor has non-finite components"));
        }
        let res = self.hermitian_residual();
        let tol = Tolerances::default().tensor_symmetry * self.max_abs().max(1.0);
        if res > tol {
            return Err(Error::domain(format!("curvature tensor violates Hermitian symmetry (residual {res:.3e})")));
        }
        Ok(())
    }

    /// Largest componentwise difference.
    pub fn max_difference(&self, other: &ChernTensor) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> ChernTensor {
        ChernTensor { n: self.n, data: self.data.iter().map(|z| z * s).collect(), basis: self.basis.clone() }
    }

    /// The block M[k][l] = R[i][j][k][l] for fixed (i, j).
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |k, l| self.get(i, j, k, l))
    }

    fn require_frame(&self) -> Result<()> {
        if self.is_frame() {
            Ok(())
        } else {
            Err(Error::usage("operation needs unitary-frame components; convert with to_frame first"))
        }
    }

    /// Applies A to the unbarred slots and conj(A) to the barred slots:
    /// out[a][b][c][d] = sum A[a][i] conj(A[b][j]) A[c][k] conj(A[d][l]) R[i][j][k][l].
    fn congruence(&self, a: &ComplexMatrix, basis: Basis) -> ChernTensor {
        let n = self.n;
        let ac = a.map(|z| z.conj());
        let mut cur = self.data.clone();
        let mut next = vec![ZERO; cur.len()];
        let strides = [n * n * n, n * n, n, 1];
        for (slot, &stride) in strides.iter().enumerate() {
            let m = if slot % 2 == 0 { a } else { &ac };
            for (pos, out) in next.iter_mut().enumerate() {
                let digit = (pos / stride) % n;
                let base = pos - digit * stride;
                let mut acc = ZERO;
                for x in 0..n {
                    acc += m[(digit, x)] * cur[base + x * stride];
                }
                *out = acc;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        ChernTensor { n, data: cur, basis }
    }
}

/// R_{i\bar j k\bar l} = -d_i d_j̄ g_{k\bar l} + g^{p\bar q} d_i g_{k\bar q} d_j̄ g_{p\bar l}.
pub fn curvature_from_jet(jet: &MetricJet) -> Result<ChernTensor> {
    let n = jet.dim();
    let inverse = jet
        .g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("metric is singular at this point"))?;
    // g^{p\bar q} as h[(p, q)]
    let h = inverse.transpose();
    let t = ChernTensor::from_fn(n, Basis::Coordinate { g: jet.g.clone() }, |i, j, k, l| {
        let mut acc = -jet.ddg(i, j, k, l);
        for p in 0..n {
            let dbar = jet.dbar_g(j, p, l);
            if dbar == ZERO {
                continue;
            }
            for q in 0..n {
                acc += h[(p, q)] * jet.dg(i, k, q) * dbar;
            }
        }
        acc
    });
    t.check_symmetry()?;
    Ok(t)
}

/// Components in the unitary frame e_a = sum_i F[i][a] d/dz_i with
/// F = conj(E) and E = cholesky_frame(g), so that g(e_a, ē_b) = delta_ab.
pub fn to_frame(t: &ChernTensor, g: &HermitianMatrix) -> Result<ChernTensor> {
    if t.is_frame() {
        return Err(Error::usage("tensor is already in a unitary frame"));
    }
    if g.dim() != t.n {
        return Err(Error::Dimension { expected: t.n, got: g.dim() });
    }
    let e = cholesky_frame(g)?;
    Ok(t.congruence(&e.adjoint(), Basis::Frame))
}

/// Shorthand for `to_frame` using the metric stored with a coordinate tensor.
pub fn coordinate_to_frame(t: &ChernTensor) -> Result<ChernTensor> {
    match &t.basis {
        Basis::Coordinate { g } => to_frame(t, g),
        Basis::Frame => Ok(t.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// All four indices rotate with the frame.
    Full,
    /// Only the endomorphism block (k, l) is conjugated: M -> U M U^†.
    Adjoint,
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Convention::Full),
            "adjoint" => Ok(Convention::Adjoint),
            other => Err(Error::usage(format!("unknown convention `{other}` (expected full or adjoint)"))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Full => "full",
            Convention::Adjoint => "adjoint",
        })
    }
}

pub fn transform_frame(t: &ChernTensor, u: &UnitaryMatrix, convention: Convention) -> Result<ChernTensor> {
    t.require_frame()?;
    if u.dim() != t.n {
        return Err(Error::Dimension { expected: t.n, got: u.dim() });
    }
    match convention {
        Convention::Full => Ok(t.congruence(u.matrix(), Basis::Frame)),
        Convention::Adjoint => {
            let n = t.n;
            let um = u.matrix();
            let ua = um.adjoint();
            let mut out = ChernTensor::zero_frame(n);
            for i in 0..n {
                for j in 0..n {
                    let m = um * t.block(i, j) * &ua;
                    for k in 0..n {
                        for l in 0..n {
                            out.set(i, j, k, l, m[(k, l)]);
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicciKind {
    First,
    Second,
    Third,
    Fourth,
}

impl RicciKind {
    pub const ALL: [RicciKind; 4] = [RicciKind::First, RicciKind::Second, RicciKind::Third, RicciKind::Fourth];
}

/// Ricci contractions. The first two are always Hermitian; the third and
/// fourth are adjoint to each other but need not be Hermitian individually.
pub fn ricci(t: &ChernTensor, kind: RicciKind) -> Result<ComplexMatrix> {
    t.require_frame()?;
    let n = t.n;
    let sum = |f: &dyn Fn(usize) -> Complex64| (0..n).map(f).sum::<Complex64>();
    Ok(match kind {
        RicciKind::First => ComplexMatrix::from_fn(n, n, |i, j| sum(&|k| t.get(i, j, k, k))),
        RicciKind::Second => ComplexMatrix::from_fn(n, n, |k, l| sum(&|i| t.get(i, i, k, l))),
        RicciKind::Third => ComplexMatrix::from_fn(n, n, |k, j| sum(&|i| t.get(i, j, k, i))),
        RicciKind::Fourth => ComplexMatrix::from_fn(n, n, |i, l| sum(&|k| t.get(i, k, k, l))),
    })
}

/// Ricci contraction as a Hermitian matrix; fails when the contraction is
/// not Hermitian within tolerance.
pub fn ricci_hermitian(t: &ChernTensor, kind: RicciKind) -> Result<HermitianMatrix> {
    let m = ricci(t, kind)?;
    let res = hermitian_residual(&m);
    if res > Tolerances::default().tensor_symmetry * t.max_abs().max(1.0) {
        return Err(Error::domain(format!("Ricci contraction {kind:?} is not Hermitian (residual {res:.3e})")));
    }
    Ok(HermitianMatrix::symmetrized(&m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalars {
    /// sum R_{i\bar i k\bar k}
    pub scal: f64,
    /// sum R_{i\bar k k\bar i}
    pub altered_scal: f64,
    pub imaginary_residual: f64,
}

impl Scalars {
    pub fn equal(&self, tol: f64) -> bool {
        (self.scal - self.altered_scal).abs() <= tol
    }
}

pub fn scalars(t: &ChernTensor) -> Result<Scalars> {
    t.require_frame()?;
    let n = t.n;
    let mut s = ZERO;
    let mut a = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += t.get(i, i, k, k);
            a += t.get(i, k, k, i);
        }
    }
    Ok(Scalars { scal: s.re, altered_scal: a.re, imaginary_residual: s.im.abs().max(a.im.abs()) })
}

/// Pointwise balanced-type test: Scal == alteredScal within `tol`.
pub fn scal_equal(t: &ChernTensor, tol: f64) -> Result<bool> {
    Ok(scalars(t)?.equal(tol))
}

/// Frame tensors realizing specific algebraic curvature conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// (c/2)(delta_ij delta_kl + delta_il delta_kj): constant HSC c.
    KahlerConstant { c: f64, n: usize },
    /// (c/2) delta_ij delta_kl + A with A_{ijkl} = -A_{klij}: R_{ijkl} + R_{klij} = c delta_ij delta_kl.
    SkewPair { c: f64, n: usize, seed: u64 },
    /// 4 delta_kl (delta_ij |z|^2 - z_j z̄_i) / |z|^6 taken as frame components.
    PaperHopf { z: Vec<Complex64> },
    /// Only R_{2\bar2 1\bar1} = -3|b|^2/(2 y^4) and R_{2\bar2 2\bar2} = -3|d|^2/(2 y^4).
    PaperTricerri { b: Complex64, d: Complex64, im_w: f64 },
    /// Gaussian components, Hermitian-symmetrized.
    Random { seed: u64, n: usize },
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > 8 {
        Err(Error::usage(format!("dimension {n} out of range 1..=8")))
    } else {
        Ok(())
    }
}

fn check_c(c: f64) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::usage("constant must be finite"))
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Random tensor satisfying conj B_{ijkl} = B_{jilk}.
fn random_hermitian<R: Rng + ?Sized>(r: &mut R, n: usize) -> ChernTensor {
    let raw = ChernTensor::from_fn(n, Basis::Frame, |_, _, _, _| rng::complex_normal(r));
    ChernTensor::from_fn(n, Basis::Frame, |i, j, k, l| (raw.get(i, j, k, l) + raw.get(j, i, l, k).conj()) * 0.5)
}

pub fn synthetic_tensor(kind: &SyntheticKind) -> Result<ChernTensor> {
    match kind {
        SyntheticKind::KahlerConstant { c, n } => {
            check_n(*n)?;
            check_c(*c)?;
            Ok(ChernTensor::from_fn(*n, Basis::Frame, |i, j, k, l| {
                Complex64::new(c / 2.0 * (delta(i, j) * delta(k, l) + delta(i, l) * delta(k, j)), 0.0)
            }))
        }
        SyntheticKind::SkewPair { c, n, seed } => {
            check_n(*n)?;
            check_c(*c)?;
            let n = *n;
            let mut r = rng::seeded(*seed);
            let mut s = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = rng::normal(&mut r);
                    s[i][j] = x;
                    s[j][i] = -x;
                }
            }
            let b = random_hermitian(&mut r, n).scaled(0.5);
            let t = ChernTensor::from_fn(n, Basis::Frame, |i, j, k, l| {
                let mut v = Complex64::new(c / 2.0 * delta(i, j) * delta(k, l), 0.0);
                if i == j && k == l {
                    v += s[i][k];
                }
                v + b.get(i, j, k, l) - b.get(k, l, i, j)
            });
            t.check_symmetry()?;
            Ok(t)
        }
        SyntheticKind::PaperHopf { z } => {
            check_n(z.len())?;
            let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
            if !(r2.is_finite() && r2 > 0.0) {
                return Err(Error::domain("closed-form Hopf tensor needs z != 0"));
            }
            let r6 = r2 * r2 * r2;
            Ok(ChernTensor::from_fn(z.len(), Basis::Frame, |i, j, k, l| {
                (Complex64::new(delta(i, j) * r2, 0.0) - z[j] * z[i].conj()) * (4.0 * delta(k, l) / r6)
            }))
        }
        SyntheticKind::PaperTricerri { b, d, im_w } => {
            let (b2, d2) = (b.norm_sqr(), d.norm_sqr());
            if !(b2.is_finite() && d2.is_finite()) {
                return Err(Error::usage("frame coefficients must be finite"));
            }
            if b2 + d2 > 1.0 + 1e-12 {
                return Err(Error::usage(format!(
                    "|b|^2 + |d|^2 = {} exceeds 1; no unitary matrix has this column",
                    b2 + d2
                )));
            }
            if !(im_w.is_finite() && *im_w > 0.0) {
                return Err(Error::domain("Im w must be positive"));
            }
            let base = -1.5 / im_w.powi(4);
            let mut t = ChernTensor::zero_frame(2);
            t.set(1, 1, 0, 0, Complex64::new(base * b2, 0.0));
            t.set(1, 1, 1, 1, Complex64::new(base * d2, 0.0));
            Ok(t)
        }
        SyntheticKind::Random { seed, n } => {
            check_n(*n)?;
            let mut r = rng::seeded(*seed);
            Ok(random_hermitian(&mut r, *n))
        }
    }
}
