//! Default numerical tolerances. Every threshold used by the library
//! defaults to a field of [`Tolerances::default`].

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Hermitian-ness tolerance for matrices: |M - M^H| <= tol * max(1, |M|).
    pub hermitian: f64,
    /// U^H U = I tolerance for unitary matrices.
    pub unitary: f64,
    /// Relative eigen reconstruction residual.
    pub eigen_residual: f64,
    /// Smallest admissible eigenvalue for a positive-definite metric.
    pub positive_definite: f64,
    /// Relative Hermitian-symmetry residual of curvature tensors.
    pub tensor_symmetry: f64,
    /// Imaginary part tolerated when a real quantity is extracted.
    pub imaginary: f64,
    /// Smallest finite-difference step accepted.
    pub min_fd_step: f64,
    /// Default finite-difference step (scaled by max(1, |p|)).
    pub fd_step: f64,
    /// PSD test tolerance for quadratic forms.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            unitary: 1e-10,
            eigen_residual: 1e-9,
            positive_definite: 1e-12,
            tensor_symmetry: 1e-8,
            imaginary: 1e-8,
            min_fd_step: 1e-10,
            fd_step: 1e-4,
            psd: 1e-8,
        }
    }
}
