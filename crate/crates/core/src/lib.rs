//! Numerical toolkit for Chern curvature of Hermitian metrics.
//!
//! The pipeline runs metric field → 2-jet → coordinate Chern tensor →
//! unitary-frame tensor → curvature matrices → quadratic-form functionals,
//! with cone restrictions and a search over the unitary frame bundle on top.
//!
//! Modules:
//! - [`linalg`]: Jacobi eigensolver, Cholesky frames, Haar unitaries.
//! - [`metric`]: metric catalog and closed-form / finite-difference jets.
//! - [`curvature`]: Chern tensor, frame changes, Ricci and scalar contractions.
//! - [`functionals`]: HSC, bisectional and quadratic-form curvatures, identity checks.
//! - [`cone`]: cone minimization, copositivity, EDM and Perron weights.
//! - [`frame_search`]: extremization over unitary frames.
//! - [`verify`] / [`sweep`]: reproducible check suites and grid sweeps.

// index loops mirror the tensor formulas
#![allow(clippy::needless_range_loop)]

pub mod cone;
pub mod config;
pub mod curvature;
pub mod error;
pub mod frame_search;
pub mod functionals;
pub mod linalg;
pub mod metric;
pub mod rng;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
