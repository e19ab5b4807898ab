//! Small dense linear algebra: cyclic Jacobi eigensolver for self-adjoint
//! matrices, Cholesky-based unitary frames and Haar-random unitaries.
//!
//! Dimensions here are tiny (n <= 8), so everything is dense and eager.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::rng;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

const MAX_SWEEPS: usize = 100;

/// Frobenius norm floored at one, used to scale relative tolerances.
pub fn scale_of(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0)
}

pub fn real_scale_of(m: &RealMatrix) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry of |M - M^H|.
pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Symmetric part (M + M^T) / 2.
pub fn symmetric_part(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// A matrix equal to its conjugate transpose within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension { expected: m.nrows(), got: m.ncols() });
        }
        if !is_finite(&m) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        let tol = Tolerances::default().hermitian * scale_of(&m);
        let res = hermitian_residual(&m);
        if res > tol {
            return Err(Error::domain(format!("matrix is not Hermitian (residual {res:.3e})")));
        }
        Ok(HermitianMatrix(m))
    }

    /// Hermitian part (M + M^H)/2 of an arbitrary square matrix.
    pub fn symmetrized(m: &ComplexMatrix) -> Self {
        HermitianMatrix((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn from_real(m: &RealMatrix) -> Result<Self> {
        Self::new(to_complex(m))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

/// A matrix with U^H U = I within tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::Dimension { expected: n, got: m.ncols() });
        }
        let res = unitarity_residual(&m);
        if res > Tolerances::default().unitary {
            return Err(Error::domain(format!("matrix is not unitary (residual {res:.3e})")));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(ComplexMatrix::identity(n, n))
    }

    /// Permutation matrix with `U[perm[j]][j] = 1`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            if i >= n {
                return Err(Error::usage(format!("permutation index {i} out of range")));
            }
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
        Self::new(m)
    }

    pub(crate) fn from_unchecked(m: ComplexMatrix) -> Self {
        UnitaryMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        UnitaryMatrix(self.0.adjoint())
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Self {
        UnitaryMatrix(&self.0 * &other.0)
    }
}

pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let p = m.adjoint() * m;
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    r
}

/// Spectrum of a self-adjoint matrix, ascending, with orthonormal eigenvectors
/// stored as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
    /// max |M - M^H| / 2 of the input before symmetrization.
    pub asymmetry: f64,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.values[0] >= -tol
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Real-symmetric counterpart of [`EigenDecomposition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealEigen {
    pub values: Vec<f64>,
    pub vectors: RealMatrix,
    pub asymmetry: f64,
}

impl RealEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.values[0] >= -tol
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }
}

/// Eigendecomposition of the Hermitian part of `m` by cyclic complex Jacobi
/// rotations. The asymmetry of the input is carried in the result.
pub fn self_adjoint_eigen(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension { expected: n, got: m.ncols() });
    }
    if n == 0 {
        return Err(Error::usage("empty matrix"));
    }
    if !is_finite(m) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let asymmetry = hermitian_residual(m) * 0.5;
    let mut a = HermitianMatrix::symmetrized(m).into_inner();
    let mut v = ComplexMatrix::identity(n, n);
    let scale = scale_of(&a);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition { values, vectors, asymmetry })
}

/// One Jacobi rotation annihilating a[p][q]. The rotation is the phase
/// diag(1, e^{-i phi}) on q followed by a real plane rotation, so real input
/// stays real.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.nrows();
    // columns: A <- A G with G_pp = c, G_pq = s, G_qp = -s e^{-i phi}, G_qq = c e^{-i phi}
    let gqp = -phase.conj() * s;
    let gqq = phase.conj() * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * gqp;
        a[(k, q)] = akp * s + akq * gqq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * gqp;
        v[(k, q)] = vkp * s + vkq * gqq;
    }
    // rows: A <- G^H A
    let cqp = gqp.conj();
    let cqq = gqq.conj();
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * cqp;
        a[(q, k)] = apk * s + aqk * cqq;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Eigendecomposition of the symmetric part of a real square matrix.
pub fn symmetric_eigen(m: &RealMatrix) -> Result<RealEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension { expected: n, got: m.ncols() });
    }
    let asymmetry = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (m[(i, j)] - m[(j, i)]).abs())
        .fold(0.0, f64::max)
        * 0.5;
    let e = self_adjoint_eigen(&to_complex(&symmetric_part(m)))?;
    Ok(RealEigen {
        values: e.values,
        vectors: e.vectors.map(|z| z.re),
        asymmetry,
    })
}

/// Columns of E form a g-orthonormal frame: E^H g E = I. E is the inverse
/// adjoint of the Cholesky factor, so it is upper triangular.
pub fn cholesky_frame(g: &HermitianMatrix) -> Result<ComplexMatrix> {
    let n = g.dim();
    let m = g.matrix();
    let eig = self_adjoint_eigen(m)?;
    let tol = Tolerances::default().positive_definite;
    if eig.min() <= tol {
        return Err(Error::domain(format!(
            "metric is not positive definite: smallest eigenvalue {:.6e}",
            eig.min()
        )));
    }
    // g = L L^H
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::domain(format!(
                "metric is not positive definite: smallest eigenvalue {:.6e}",
                eig.min()
            )));
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    // E = L^{-H}: solve L^H E = I by back substitution (L^H upper triangular).
    let lh = l.adjoint();
    let mut e = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = if i == col { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for k in (i + 1)..n {
                s -= lh[(i, k)] * e[(k, col)];
            }
            e[(i, col)] = s / lh[(i, i)];
        }
    }
    Ok(e)
}

/// Haar-distributed unitary: Gram-Schmidt QR of a complex Gaussian matrix.
/// Gram-Schmidt yields a triangular factor with positive real diagonal,
/// which is the phase convention that makes Q Haar.
pub fn haar_unitary(n: usize, seed: u64) -> UnitaryMatrix {
    let mut r = rng::seeded(seed);
    haar_unitary_from(&mut r, n)
}

pub fn haar_unitary_from<R: Rng + ?Sized>(r: &mut R, n: usize) -> UnitaryMatrix {
    assert!(n >= 1, "dimension must be positive");
    let z = ComplexMatrix::from_fn(n, n, |_, _| rng::complex_normal(r));
    let mut q = z.clone();
    for j in 0..n {
        // two passes of modified Gram-Schmidt keep orthogonality at machine precision
        for _ in 0..2 {
            for k in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    proj += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..n {
                    let qik = q[(i, k)];
                    q[(i, j)] -= proj * qik;
                }
            }
        }
        let norm = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    UnitaryMatrix::from_unchecked(q)
}
