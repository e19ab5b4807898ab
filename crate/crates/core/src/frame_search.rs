//! Extremizing curvature functionals over unitary frames.
//!
//! A frame is U = U0 · D(phases) · Π_{p<q} G_pq(θ, ψ), with U0 a Haar
//! restart (the identity for restart 0) and G_pq a complex Givens rotation.
//! Each restart runs coordinate descent over the angles with a shrinking
//! step, accepting only strict improvements.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{cone_max, cone_min, Cone, DEFAULT_RESOLUTION};
use crate::curvature::{transform_frame, ChernTensor, Convention};
use crate::error::{Error, Result};
use crate::functionals::{evaluate, form_matrix, hsc, matrices_from, FunctionalKind};
use crate::linalg::{haar_unitary_from, symmetric_eigen, ComplexMatrix, UnitaryMatrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Coordinate-descent passes per restart.
    pub refine_steps: usize,
    pub initial_angle: f64,
    pub shrink: f64,
    pub seed: u64,
    /// Steps below this end the descent.
    pub tol: f64,
    /// Grid resolution for cone-restricted inner problems.
    pub cone_resolution: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 8,
            refine_steps: 40,
            initial_angle: 0.5,
            shrink: 0.5,
            seed: 0,
            tol: 1e-9,
            cone_resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::usage("restarts must be at least 1"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::usage("shrink factor must lie in (0, 1)"));
        }
        if !(self.initial_angle.is_finite() && self.initial_angle > 0.0) {
            return Err(Error::usage("initial angle must be positive"));
        }
        if self.cone_resolution < 2 {
            return Err(Error::usage("cone resolution must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameExtremum {
    pub value: f64,
    pub frame: UnitaryMatrix,
    /// Real vector in the transformed frame attaining `value`; for HSC a
    /// basis vector.
    pub vector: Vec<f64>,
    pub convention: Convention,
    pub restart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartStat {
    pub restart: usize,
    pub inf: f64,
    pub sup: f64,
    /// Objective never worsened during refinement.
    pub monotone: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub inf: FrameExtremum,
    pub sup: FrameExtremum,
    pub restarts: Vec<RestartStat>,
}

#[derive(Clone, Copy, PartialEq)]
enum Goal {
    Min,
    Max,
}

/// Inner extremum over vectors for a fixed transformed tensor.
fn inner(t: &ChernTensor, kind: FunctionalKind, cone: &Cone, resolution: usize, goal: Goal) -> Result<(f64, Vec<f64>)> {
    let n = t.dim();
    if kind == FunctionalKind::Hsc {
        // over all frames every unit vector is a frame vector, so probing
        // the basis vectors suffices
        let mut best = (0usize, t.get(0, 0, 0, 0).re);
        for k in 1..n {
            let v = t.get(k, k, k, k).re;
            if (goal == Goal::Min && v < best.1) || (goal == Goal::Max && v > best.1) {
                best = (k, v);
            }
        }
        let e = (0..n).map(|i| if i == best.0 { 1.0 } else { 0.0 }).collect();
        return Ok((best.1, e));
    }
    let q = form_matrix(kind, &matrices_from(t))?;
    match cone {
        Cone::Full => {
            let e = symmetric_eigen(&q)?;
            Ok(match goal {
                Goal::Min => (e.min(), e.vector(0)),
                Goal::Max => (e.max(), e.vector(n - 1)),
            })
        }
        _ => {
            let r = match goal {
                Goal::Min => cone_min(&q, cone, resolution)?,
                Goal::Max => cone_max(&q, cone, resolution)?,
            };
            Ok((r.value, r.argmin))
        }
    }
}

fn givens(n: usize, p: usize, q: usize, theta: f64, psi: f64) -> ComplexMatrix {
    let mut g = ComplexMatrix::identity(n, n);
    let (s, c) = theta.sin_cos();
    let ph = Complex64::from_polar(1.0, psi);
    g[(p, p)] = Complex64::new(c, 0.0);
    g[(q, q)] = Complex64::new(c, 0.0);
    g[(p, q)] = -ph * s;
    g[(q, p)] = ph.conj() * s;
    g
}

/// U0 · D(phases) · Π G_pq for parameters laid out as n phases followed by
/// (θ, ψ) per pair p < q.
fn assemble(u0: &ComplexMatrix, params: &[f64]) -> UnitaryMatrix {
    let n = u0.nrows();
    let mut m = u0.clone();
    for (k, &phi) in params[..n].iter().enumerate() {
        let ph = Complex64::from_polar(1.0, phi);
        m.column_mut(k).iter_mut().for_each(|z| *z *= ph);
    }
    let mut idx = n;
    for p in 0..n {
        for q in (p + 1)..n {
            m *= givens(n, p, q, params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    UnitaryMatrix::from_unchecked(m)
}

fn param_count(n: usize) -> usize {
    n + n * (n - 1)
}

struct Descent {
    value: f64,
    vector: Vec<f64>,
    frame: UnitaryMatrix,
    monotone: bool,
    evaluations: usize,
}

#[allow(clippy::too_many_arguments)]
fn descend(
    t: &ChernTensor,
    kind: FunctionalKind,
    cone: &Cone,
    convention: Convention,
    cfg: &SearchConfig,
    u0: &ComplexMatrix,
    goal: Goal,
) -> Result<Descent> {
    let n = t.dim();
    let better = |a: f64, b: f64| match goal {
        Goal::Min => a < b,
        Goal::Max => a > b,
    };
    let objective = |params: &[f64]| -> Result<(f64, Vec<f64>, UnitaryMatrix)> {
        let u = assemble(u0, params);
        let tt = transform_frame(t, &u, convention)?;
        let (v, x) = inner(&tt, kind, cone, cfg.cone_resolution, goal)?;
        Ok((v, x, u))
    };
    let mut params = vec![0.0; param_count(n)];
    let (mut value, mut vector, mut frame) = objective(&params)?;
    let mut evaluations = 1;
    let mut monotone = true;
    let mut step = cfg.initial_angle;
    for _ in 0..cfg.refine_steps {
        if step < cfg.tol {
            break;
        }
        let mut improved = false;
        for c in 0..params.len() {
            for sign in [1.0, -1.0] {
                let mut trial = params.clone();
                trial[c] += sign * step;
                let (v, x, u) = objective(&trial)?;
                evaluations += 1;
                if better(v, value) {
                    if better(value, v) {
                        monotone = false;
                    }
                    params = trial;
                    value = v;
                    vector = x;
                    frame = u;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= cfg.shrink;
        }
    }
    Ok(Descent { value, vector, frame, monotone, evaluations })
}

/// Infimum and supremum of a functional over frames (and vectors in the
/// cone). Restarts run in parallel; ties resolve to the lowest restart index.
pub fn extremize(
    t: &ChernTensor,
    kind: FunctionalKind,
    cone: &Cone,
    convention: Convention,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    if !t.is_frame() {
        return Err(Error::usage("frame search needs unitary-frame components"));
    }
    let n = t.dim();
    if kind == FunctionalKind::Hsc && !matches!(cone, Cone::Full) {
        return Err(Error::usage("hsc is searched over complex vectors; cone restrictions do not apply"));
    }
    let runs: Vec<Result<(Descent, Descent)>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let u0 = if r == 0 {
                ComplexMatrix::identity(n, n)
            } else {
                let mut g = rng::split(cfg.seed, r as u64);
                haar_unitary_from(&mut g, n).matrix().clone()
            };
            let lo = descend(t, kind, cone, convention, cfg, &u0, Goal::Min)?;
            let hi = descend(t, kind, cone, convention, cfg, &u0, Goal::Max)?;
            Ok((lo, hi))
        })
        .collect();
    let mut stats = Vec::with_capacity(cfg.restarts);
    let mut inf: Option<FrameExtremum> = None;
    let mut sup: Option<FrameExtremum> = None;
    for (r, run) in runs.into_iter().enumerate() {
        let (lo, hi) = run?;
        stats.push(RestartStat {
            restart: r,
            inf: lo.value,
            sup: hi.value,
            monotone: lo.monotone && hi.monotone,
            evaluations: lo.evaluations + hi.evaluations,
        });
        if inf.as_ref().is_none_or(|b| lo.value < b.value) {
            inf = Some(FrameExtremum { value: lo.value, frame: lo.frame, vector: lo.vector, convention, restart: r });
        }
        if sup.as_ref().is_none_or(|b| hi.value > b.value) {
            sup = Some(FrameExtremum { value: hi.value, frame: hi.frame, vector: hi.vector, convention, restart: r });
        }
    }
    Ok(SearchOutcome { inf: inf.expect("at least one restart"), sup: sup.expect("at least one restart"), restarts: stats })
}

/// Re-evaluates an extremum at its frame and vector.
pub fn reevaluate(t: &ChernTensor, kind: FunctionalKind, ext: &FrameExtremum) -> Result<f64> {
    let tt = transform_frame(t, &ext.frame, ext.convention)?;
    if kind == FunctionalKind::Hsc {
        let w: Vec<Complex64> = ext.vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        return hsc(&tt, &w);
    }
    evaluate(kind, &matrices_from(&tt), &ext.vector)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    /// Largest spread of the per-frame minimum or maximum.
    pub max_deviation: f64,
    pub min_range: (f64, f64),
    pub max_range: (f64, f64),
    pub samples: usize,
}

/// Evaluates the inner (full-space) extrema in `samples` Haar frames and
/// reports how much they move.
pub fn invariance_test(
    t: &ChernTensor,
    kind: FunctionalKind,
    convention: Convention,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<InvarianceReport> {
    if samples < 10 {
        return Err(Error::usage("invariance test needs at least 10 samples"));
    }
    if !t.is_frame() {
        return Err(Error::usage("invariance test needs unitary-frame components"));
    }
    let n = t.dim();
    let extrema: Vec<Result<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut g = rng::split(seed, s as u64);
            let u = haar_unitary_from(&mut g, n);
            let tt = transform_frame(t, &u, convention)?;
            let lo = inner(&tt, kind, &Cone::Full, 2, Goal::Min)?.0;
            let hi = inner(&tt, kind, &Cone::Full, 2, Goal::Max)?.0;
            Ok((lo, hi))
        })
        .collect();
    let mut min_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut max_range = (f64::INFINITY, f64::NEG_INFINITY);
    for e in extrema {
        let (lo, hi) = e?;
        min_range = (min_range.0.min(lo), min_range.1.max(lo));
        max_range = (max_range.0.min(hi), max_range.1.max(hi));
    }
    let max_deviation = (min_range.1 - min_range.0).max(max_range.1 - max_range.0);
    Ok(InvarianceReport { invariant: max_deviation <= tol, max_deviation, min_range, max_range, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{scalars, synthetic_tensor, SyntheticKind};
    use crate::functionals::rayleigh_bounds;
    use crate::linalg::{haar_unitary, unitarity_residual};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hopf(z: &[f64]) -> ChernTensor {
        synthetic_tensor(&SyntheticKind::PaperHopf { z: z.iter().map(|&x| c(x)).collect() }).unwrap()
    }

    fn tricerri(y: f64) -> ChernTensor {
        synthetic_tensor(&SyntheticKind::PaperTricerri { b: c(0.0), d: c(1.0), im_w: y }).unwrap()
    }

    fn small() -> SearchConfig {
        SearchConfig { restarts: 4, refine_steps: 30, seed: 3, ..Default::default() }
    }

    #[test]
    fn assembled_frames_are_unitary() {
        let u0 = haar_unitary(4, 1).matrix().clone();
        let params: Vec<f64> = (0..param_count(4)).map(|k| 0.3 * k as f64 - 1.0).collect();
        let u = assemble(&u0, &params);
        assert!(unitarity_residual(u.matrix()) < 1e-12);
    }

    #[test]
    fn kahler_constant_diagonal_probe() {
        let t = synthetic_tensor(&SyntheticKind::KahlerConstant { c: 1.7, n: 3 }).unwrap();
        let out = extremize(&t, FunctionalKind::Hsc, &Cone::Full, Convention::Full, &small()).unwrap();
        assert_abs_diff_eq!(out.inf.value, 1.7, epsilon = 1e-12);
        assert_abs_diff_eq!(out.sup.value, 1.7, epsilon = 1e-12);
    }

    #[test]
    fn tricerri_rbc_pinching_adjoint() {
        let out = extremize(&tricerri(1.0), FunctionalKind::Rbc, &Cone::Full, Convention::Adjoint, &small()).unwrap();
        assert_abs_diff_eq!(out.sup.value, 0.75, epsilon = 1e-6);
        // the unitary constraint |b|^2 + |d|^2 = 1 caps the infimum at -3/2
        assert_abs_diff_eq!(out.inf.value, -1.5, epsilon = 1e-6);
        let alt = extremize(&tricerri(1.0), FunctionalKind::AlteredRbc, &Cone::Full, Convention::Adjoint, &small()).unwrap();
        assert_abs_diff_eq!(alt.inf.value, -1.5, epsilon = 1e-6);
        assert_abs_diff_eq!(alt.sup.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn hopf_qobc_supremum() {
        for z in [[1.0, 0.0], [0.6, 0.8], [1.0, 1.0]] {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            let out = extremize(&hopf(&z), FunctionalKind::Qobc, &Cone::Full, Convention::Full, &small()).unwrap();
            assert!((out.sup.value - 8.0 / (r2 * r2)).abs() < 0.01 * 8.0 / (r2 * r2));
            assert_abs_diff_eq!(out.inf.value, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn extrema_reevaluate() {
        let t = synthetic_tensor(&SyntheticKind::Random { seed: 5, n: 3 }).unwrap();
        for kind in [FunctionalKind::Hsc, FunctionalKind::Rbc, FunctionalKind::AlteredQobc] {
            for conv in [Convention::Full, Convention::Adjoint] {
                let out = extremize(&t, kind, &Cone::Full, conv, &small()).unwrap();
                for ext in [&out.inf, &out.sup] {
                    assert!((reevaluate(&t, kind, ext).unwrap() - ext.value).abs() < 1e-9);
                }
                assert!(out.restarts.iter().all(|s| s.monotone));
                assert!(out.inf.value <= out.sup.value);
            }
        }
        let out = extremize(&t, FunctionalKind::Rbc, &Cone::NonnegOrthant, Convention::Full, &small()).unwrap();
        assert!((reevaluate(&t, FunctionalKind::Rbc, &out.inf).unwrap() - out.inf.value).abs() < 1e-9);
        assert!(Cone::NonnegOrthant.contains(&out.inf.vector, 1e-12));
    }

    #[test]
    fn search_is_deterministic() {
        let t = synthetic_tensor(&SyntheticKind::Random { seed: 2, n: 3 }).unwrap();
        let a = extremize(&t, FunctionalKind::AlteredHsc, &Cone::Full, Convention::Full, &small()).unwrap();
        let b = extremize(&t, FunctionalKind::AlteredHsc, &Cone::Full, Convention::Full, &small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_restart_without_refinement_is_rayleigh() {
        let t = synthetic_tensor(&SyntheticKind::Random { seed: 6, n: 4 }).unwrap();
        let cfg = SearchConfig { restarts: 1, refine_steps: 0, ..Default::default() };
        let out = extremize(&t, FunctionalKind::Rbc, &Cone::Full, Convention::Full, &cfg).unwrap();
        let (lo, hi) = rayleigh_bounds(&matrices_from(&t).r).unwrap();
        assert_eq!(out.inf.value, lo);
        assert_eq!(out.sup.value, hi);
    }

    #[test]
    fn search_config_validation() {
        let t = hopf(&[1.0, 0.0]);
        for cfg in [
            SearchConfig { restarts: 0, ..Default::default() },
            SearchConfig { shrink: 1.0, ..Default::default() },
            SearchConfig { cone_resolution: 1, ..Default::default() },
        ] {
            assert!(matches!(extremize(&t, FunctionalKind::Rbc, &Cone::Full, Convention::Full, &cfg), Err(Error::Usage(_))));
        }
        assert!(extremize(&t, FunctionalKind::Hsc, &Cone::NonnegOrthant, Convention::Full, &small()).is_err());
    }

    #[test]
    fn hopf_is_adjoint_invariant() {
        let t = hopf(&[1.0, 1.0]);
        for kind in [
            FunctionalKind::Rbc,
            FunctionalKind::AlteredRbc,
            FunctionalKind::AlteredHsc,
            FunctionalKind::Qobc,
            FunctionalKind::AlteredQobc,
        ] {
            let rep = invariance_test(&t, kind, Convention::Adjoint, 1000, 7, 1e-9).unwrap();
            assert!(rep.invariant, "{kind}: {rep:?}");
            assert!(rep.max_deviation < 1e-9);
        }
    }

    #[test]
    fn tricerri_altered_rbc_is_frame_dependent() {
        let rep = invariance_test(&tricerri(1.0), FunctionalKind::AlteredRbc, Convention::Adjoint, 200, 1, 1e-6).unwrap();
        assert!(!rep.invariant);
        assert!(rep.min_range.0 >= -1.5 - 1e-12 && rep.min_range.1 <= 1e-12);
    }

    #[test]
    fn zero_tensor_is_invariant() {
        let rep = invariance_test(&ChernTensor::zero_frame(3), FunctionalKind::Rbc, Convention::Full, 20, 1, 0.0).unwrap();
        assert!(rep.invariant);
        assert_eq!(rep.max_deviation, 0.0);
        assert!(invariance_test(&ChernTensor::zero_frame(3), FunctionalKind::Rbc, Convention::Full, 5, 1, 0.0).is_err());
    }

    #[test]
    fn full_convention_scalar_probe() {
        let t = hopf(&[0.4, 0.9]);
        let base = scalars(&t).unwrap();
        for s in 0..100 {
            let u = haar_unitary(2, 1000 + s);
            let sc = scalars(&transform_frame(&t, &u, Convention::Full).unwrap()).unwrap();
            assert!((sc.scal - base.scal).abs() < 1e-9);
            assert!((sc.altered_scal - base.altered_scal).abs() < 1e-9);
        }
    }
}
