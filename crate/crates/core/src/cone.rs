//! Cone-restricted quadratic forms, copositivity, embedding-dimension-one
//! distance matrices and their Perron weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{rayleigh, weitzenbock, IdentityCheck, IdentityReport, Witness};
use crate::linalg::{symmetric_eigen, symmetric_part, RealMatrix};
use crate::rng;

/// Largest dimension (and generator count) accepted by the grid search.
pub const MAX_GRID_DIM: usize = 6;
pub const DEFAULT_RESOLUTION: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cone", content = "generators", rename_all = "snake_case")]
pub enum Cone {
    Full,
    /// x >= 0, x != 0
    NonnegOrthant,
    /// x_1 >= ... >= x_n >= 0, x != 0
    MonotoneNonneg,
    /// Non-negative combinations of the given vectors, origin excluded.
    Generators(Vec<Vec<f64>>),
}

impl std::str::FromStr for Cone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Cone::Full),
            "orthant" | "nonneg_orthant" => Ok(Cone::NonnegOrthant),
            "monotone" | "monotone_nonneg" => Ok(Cone::MonotoneNonneg),
            other => Err(Error::usage(format!("unknown cone `{other}` (expected full, orthant or monotone)"))),
        }
    }
}

impl Cone {
    pub fn name(&self) -> &'static str {
        match self {
            Cone::Full => "full",
            Cone::NonnegOrthant => "orthant",
            Cone::MonotoneNonneg => "monotone",
            Cone::Generators(_) => "generators",
        }
    }

    /// Generators spanning the cone in dimension n; `None` for the full space.
    pub fn generators(&self, n: usize) -> Result<Option<Vec<Vec<f64>>>> {
        Ok(match self {
            Cone::Full => None,
            Cone::NonnegOrthant => Some((0..n).map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()).collect()),
            Cone::MonotoneNonneg => Some((1..=n).map(|k| (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect()).collect()),
            Cone::Generators(g) => {
                if g.is_empty() {
                    return Err(Error::usage("generator cone needs at least one generator"));
                }
                for v in g {
                    if v.len() != n {
                        return Err(Error::Dimension { expected: n, got: v.len() });
                    }
                    if v.iter().all(|x| *x == 0.0) || v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::usage("generators must be finite and non-zero"));
                    }
                }
                Some(g.clone())
            }
        })
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.iter().all(|x| x.abs() <= tol) {
            return false;
        }
        match self {
            Cone::Full => true,
            Cone::NonnegOrthant => v.iter().all(|x| *x >= -tol),
            Cone::MonotoneNonneg => v.windows(2).all(|w| w[0] >= w[1] - tol) && v.last().is_some_and(|x| *x >= -tol),
            // membership in a general finitely generated cone is an LP; not needed here
            Cone::Generators(_) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMin {
    pub value: f64,
    /// Unit vector attaining `value`.
    pub argmin: Vec<f64>,
    /// Bound on how far `value` may sit above the true cone minimum.
    pub grid_bound: f64,
}

fn frobenius(m: &RealMatrix) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn combine(gens: &[Vec<f64>], weights: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (g, &w) in gens.iter().zip(weights) {
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(g) {
                *o += w * x;
            }
        }
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Minimum of v^T M̂ v / |v|^2 over the cone, M̂ the symmetric part of `m`.
///
/// The full space is solved exactly by eigendecomposition. Other cones are
/// searched over convex combinations of generators on a simplex grid with
/// `resolution` points per axis (ties go to the lexicographically first grid
/// point), followed by pairwise mass-transfer refinement.
pub fn cone_min(m: &RealMatrix, cone: &Cone, resolution: usize) -> Result<ConeMin> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension { expected: n, got: m.ncols() });
    }
    if n == 0 {
        return Err(Error::usage("empty matrix"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let q = symmetric_part(m);
    let Some(gens) = cone.generators(n)? else {
        let e = symmetric_eigen(&q)?;
        return Ok(ConeMin { value: e.min(), argmin: e.vector(0), grid_bound: 0.0 });
    };
    if resolution < 2 {
        return Err(Error::usage("grid resolution must be at least 2"));
    }
    if n > MAX_GRID_DIM || gens.len() > MAX_GRID_DIM {
        return Err(Error::usage(format!("cone search supports n <= {MAX_GRID_DIM}, got {}", n.max(gens.len()))));
    }
    let k = gens.len();
    let steps = resolution - 1;

    // Enumerate compositions of `steps` into k parts in lexicographic order,
    // parallel over the first part; merging in order keeps the first minimum.
    let best = (0..=steps)
        .into_par_iter()
        .map(|first| {
            let mut parts = vec![0usize; k];
            parts[0] = first;
            let mut best: Option<(f64, Vec<usize>)> = None;
            let mut x = vec![0.0; n];
            let mut w = vec![0.0; k];
            visit_compositions(&mut parts, 1, steps - first, &mut |p| {
                for (wi, &pi) in w.iter_mut().zip(p) {
                    *wi = pi as f64 / steps as f64;
                }
                combine(&gens, &w, &mut x);
                if x.iter().map(|t| t * t).sum::<f64>() <= 1e-24 {
                    return;
                }
                let val = rayleigh(&q, &x);
                if best.as_ref().is_none_or(|(b, _)| val < *b) {
                    best = Some((val, p.to_vec()));
                }
            });
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<usize>)>, |acc, cur| match acc {
            Some(a) if a.0 <= cur.0 => Some(a),
            _ => Some(cur),
        })
        .ok_or_else(|| Error::domain("cone generators only combine to the origin"))?;

    let mut weights: Vec<f64> = best.1.iter().map(|&p| p as f64 / steps as f64).collect();
    let mut x = vec![0.0; n];
    combine(&gens, &weights, &mut x);
    let mut value = rayleigh(&q, &x);
    let mut min_norm = x.iter().map(|t| t * t).sum::<f64>().sqrt();

    // pairwise mass transfer with a shrinking step
    let mut step = 1.0 / steps as f64;
    while step > 1e-13 {
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j || weights[j] <= 0.0 {
                    continue;
                }
                let s = step.min(weights[j]);
                let mut trial = weights.clone();
                trial[i] += s;
                trial[j] -= s;
                combine(&gens, &trial, &mut x);
                let nx = x.iter().map(|t| t * t).sum::<f64>();
                if nx <= 1e-24 {
                    continue;
                }
                let val = rayleigh(&q, &x);
                if val < value {
                    value = val;
                    weights = trial;
                    min_norm = min_norm.min(nx.sqrt());
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    combine(&gens, &weights, &mut x);
    let gen_norm = gens.iter().map(|g| g.iter().map(|t| t * t).sum::<f64>()).sum::<f64>().sqrt();
    let grid_bound = 2.0 * frobenius(&q) * gen_norm * (k as f64).sqrt() / (steps as f64 * min_norm.max(1e-12));
    Ok(ConeMin { value, argmin: normalized(&x), grid_bound })
}

/// Maximum over the cone, as minus the minimum of -M.
pub fn cone_max(m: &RealMatrix, cone: &Cone, resolution: usize) -> Result<ConeMin> {
    let r = cone_min(&(-m), cone, resolution)?;
    Ok(ConeMin { value: -r.value, ..r })
}

fn visit_compositions<F: FnMut(&[usize])>(parts: &mut Vec<usize>, pos: usize, remaining: usize, f: &mut F) {
    if pos == parts.len() {
        if remaining == 0 {
            f(parts);
        }
        return;
    }
    if pos == parts.len() - 1 {
        parts[pos] = remaining;
        f(parts);
        parts[pos] = 0;
        return;
    }
    for v in 0..=remaining {
        parts[pos] = v;
        visit_compositions(parts, pos + 1, remaining - v, f);
    }
    parts[pos] = 0;
}

/// Exact copositivity of a 2x2 matrix on the non-negative quadrant.
pub fn copositive_2x2(m: &RealMatrix) -> Result<bool> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::Dimension { expected: 2, got: m.nrows().max(m.ncols()) });
    }
    let q = symmetric_part(m);
    let (a, b, c) = (q[(0, 0)], q[(0, 1)], q[(1, 1)]);
    Ok(a >= 0.0 && c >= 0.0 && b + (a * c).sqrt() >= 0.0)
}

/// Distance matrix Σ[a][c] = (v_a - v_c)^2 of a point configuration on a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdMatrix {
    pub v: Vec<f64>,
    pub sigma: RealMatrix,
}

impl EdMatrix {
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// max |Σ[a][c] - (v_a - v_c)^2|, zero by construction.
    pub fn consistency_residual(&self) -> f64 {
        let n = self.dim();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for c in 0..n {
                let d = self.v[a] - self.v[c];
                r = r.max((self.sigma[(a, c)] - d * d).abs());
            }
        }
        r
    }
}

pub fn edm_from_vector(v: &[f64]) -> Result<EdMatrix> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("vector has non-finite entries"));
    }
    let n = v.len();
    let sigma = RealMatrix::from_fn(n, n, |a, c| {
        let d = v[a] - v[c];
        d * d
    });
    Ok(EdMatrix { v: v.to_vec(), sigma })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronWeights {
    /// Eigenvalues of Σ, descending.
    pub eigenvalues: Vec<f64>,
    /// r_k = -δ_k / δ_1 for k = 2..n.
    pub weights: Vec<f64>,
}

impl PerronWeights {
    /// 0 <= r_2 <= ... <= r_n <= 1 within `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.weights.first().is_none_or(|r| *r >= -tol)
            && self.weights.last().is_none_or(|r| *r <= 1.0 + tol)
            && self.weights.windows(2).all(|w| w[0] <= w[1] + tol)
    }
}

pub fn perron_weights(e: &EdMatrix) -> Result<PerronWeights> {
    let eig = symmetric_eigen(&e.sigma)?;
    let mut deltas = eig.values.clone();
    deltas.reverse();
    let d1 = deltas[0];
    let scale = e.sigma.amax().max(f64::MIN_POSITIVE);
    if d1 <= 1e-14 * scale || e.sigma.amax() == 0.0 {
        return Err(Error::domain("Perron weights need a non-zero distance matrix"));
    }
    let weights = deltas[1..].iter().map(|d| -d / d1).collect();
    Ok(PerronWeights { eigenvalues: deltas, weights })
}

/// M lies in the dual cone of distance matrices iff its Weitzenböck matrix is PSD.
pub fn dual_edm_test(m: &RealMatrix, tol: f64) -> Result<bool> {
    Ok(symmetric_eigen(&weitzenbock(m))?.min() >= -tol)
}

/// tr(M̂ Σ_v) = sum_{a,c} M[a][c] (v_a - v_c)^2.
pub fn trace_pairing(m: &RealMatrix, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for a in 0..n {
        for c in 0..n {
            let d = v[a] - v[c];
            acc += m[(a, c)] * d * d;
        }
    }
    acc
}

/// Outcome of direct sampling of trace pairings over unit vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSample {
    pub nonnegative: bool,
    pub min_pairing: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
}

const SAMPLE_CHUNK: usize = 1024;

/// Unit probe vectors (0,..,0,1,..,1) followed by Gaussian unit vectors.
fn sample_vector(n: usize, index: usize, r: &mut rng::CurvRng) -> Vec<f64> {
    let probes = n.saturating_sub(1);
    if index < probes {
        let ones = index + 1;
        return normalized(&(0..n).map(|i| if i >= n - ones { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    }
    loop {
        let v = rng::normal_vec(r, n);
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            return normalized(&v);
        }
    }
}

fn for_each_sample<T, F>(n: usize, samples: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &[f64]) -> T + Sync,
{
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut r = rng::split(seed, c as u64);
            let lo = c * SAMPLE_CHUNK;
            let hi = (lo + SAMPLE_CHUNK).min(samples);
            (lo..hi).map(|i| f(i, &sample_vector(n, i, &mut r))).collect::<Vec<_>>()
        })
        .collect()
}

/// Samples tr(M̂ Σ_v) over unit v; non-negative when every sample is >= -tol.
pub fn sampled_dual_edm(m: &RealMatrix, samples: usize, seed: u64, tol: f64) -> Result<PairingSample> {
    let n = m.nrows();
    if samples == 0 || n == 0 {
        return Err(Error::usage("sampling needs a positive sample count and dimension"));
    }
    let values = for_each_sample(n, samples, seed, |_, v| (trace_pairing(m, v), v.to_vec()));
    let (min_pairing, argmin) = values
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |acc, (p, v)| if p < acc.0 { (p, v) } else { acc });
    Ok(PairingSample { nonnegative: min_pairing >= -tol, min_pairing, argmin, samples })
}

/// Eigenpairs of Σ_v restricted to span{1, v, v∘v}, which contains its range.
fn edm_spectrum(v: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = v.len();
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(3);
    for cand in [vec![1.0; n], v.to_vec(), sq] {
        let mut u = cand;
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = u.iter().zip(b).map(|(x, y)| x * y).sum();
                u.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            basis.push(u.into_iter().map(|x| x / norm).collect());
        }
    }
    let e = edm_from_vector(v)?;
    let k = basis.len();
    let b = RealMatrix::from_fn(k, k, |p, q| {
        let mut acc = 0.0;
        for a in 0..n {
            for c in 0..n {
                acc += basis[p][a] * e.sigma[(a, c)] * basis[q][c];
            }
        }
        acc
    });
    let eig = symmetric_eigen(&b)?;
    Ok((0..k)
        .rev()
        .map(|j| {
            let y = eig.vector(j);
            let q = (0..n).map(|a| (0..k).map(|p| basis[p][a] * y[p]).sum()).collect();
            (eig.values[j], q)
        })
        .collect())
}

/// Cross-checks the Perron-weight criterion for non-negative quadratic
/// orthogonal bisectional curvature against direct trace pairings and the
/// Weitzenböck test.
///
/// For each sampled unit v, with δ_1 >= ... the eigenvalues of Σ_v, q_k its
/// eigenvectors, r_k = -δ_k/δ_1 and μ_k = q_k^T M̂ q_k, the criterion reads
/// μ_1 >= sum_k r_k μ_k, which is δ_1^{-1} tr(M̂ Σ_v) >= 0. The same inequality
/// with μ replaced by the sorted eigenvalues of M̂ holds for every matrix
/// (Chebyshev's sum inequality with tr Σ_v = 0) and is reported for reference.
pub fn perron_criterion_check(m: &RealMatrix, samples: usize, seed: u64, tol: f64) -> Result<PerronCheck> {
    let n = m.nrows();
    if samples < 100 {
        return Err(Error::usage("Perron criterion check needs at least 100 samples"));
    }
    if m.ncols() != n || n < 2 {
        return Err(Error::usage("Perron criterion check needs a square matrix with n >= 2"));
    }
    let q = symmetric_part(m);
    let mut lambdas = symmetric_eigen(&q)?.values;
    lambdas.reverse();

    struct Sample {
        v: Vec<f64>,
        pairing: f64,
        perron_margin: f64,
        literal_margin: f64,
    }
    let results: Vec<Result<Option<Sample>>> = for_each_sample(n, samples, seed, |_, v| {
        let spec = edm_spectrum(v)?;
        let d1 = spec[0].0;
        if d1 <= 1e-12 {
            return Ok(None);
        }
        let mu: Vec<f64> = spec.iter().map(|(_, qv)| rayleigh(&q, qv)).collect();
        let perron = mu[0] - spec[1..].iter().zip(&mu[1..]).map(|((d, _), m)| -d / d1 * m).sum::<f64>();
        let mut deltas: Vec<f64> = spec.iter().map(|(d, _)| *d).collect();
        deltas.resize(n, 0.0);
        deltas.sort_by(|a, b| b.total_cmp(a));
        let literal = lambdas[0] - (1..n).map(|k| -deltas[k] / d1 * lambdas[k]).sum::<f64>();
        Ok(Some(Sample { v: v.to_vec(), pairing: trace_pairing(&q, v), perron_margin: d1 * perron, literal_margin: d1 * literal }))
    });

    let mut perron_ok = true;
    let mut pairing_ok = true;
    let mut disagreements = 0;
    let mut literal_failures = 0;
    let mut counterexample = None;
    let mut worst = (f64::INFINITY, Vec::new());
    let mut used = 0;
    for r in results {
        let Some(s) = r? else { continue };
        used += 1;
        let p_ok = s.perron_margin >= -tol;
        let t_ok = s.pairing >= -tol;
        if p_ok != t_ok {
            disagreements += 1;
        }
        if s.literal_margin < -tol {
            literal_failures += 1;
        }
        if !p_ok && counterexample.is_none() {
            counterexample = Some(s.v.clone());
        }
        perron_ok &= p_ok;
        pairing_ok &= t_ok;
        if s.perron_margin < worst.0 {
            worst = (s.perron_margin, s.v);
        }
    }
    let dual = dual_edm_test(m, tol)?;

    let check = |name: &str, residual: f64, passed: bool, informational: bool, witness: Option<Witness>| IdentityCheck {
        name: name.to_string(),
        max_residual: residual,
        tolerance: tol,
        passed,
        informational,
        witnesses: witness.into_iter().collect(),
    };
    let witness = counterexample.clone().map(|v| Witness {
        lhs: trace_pairing(&q, &v),
        rhs: 0.0,
        indices: Vec::new(),
    });
    let checks = vec![
        check("perron_criterion", (-worst.0).max(0.0), perron_ok, false, witness),
        check("criterion_matches_pairing", disagreements as f64, disagreements == 0, true, None),
        check("criterion_matches_weitzenbock", if perron_ok == dual { 0.0 } else { 1.0 }, perron_ok == dual, true, None),
        check("literal_eigenvalue_form", literal_failures as f64, literal_failures == 0, true, None),
    ];
    let report = IdentityReport {
        name: "perron_criterion".into(),
        passed: perron_ok,
        max_residual: (-worst.0).max(0.0),
        checks,
    };
    Ok(PerronCheck {
        report,
        perron_nonnegative: perron_ok,
        pairing_nonnegative: pairing_ok,
        dual_edm: dual,
        disagreements,
        samples: used,
        counterexample,
        min_margin: worst.0,
        min_margin_vector: worst.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronCheck {
    pub report: IdentityReport,
    /// Verdict of the Perron-weight criterion over the samples.
    pub perron_nonnegative: bool,
    /// Verdict of the raw trace pairings over the same samples.
    pub pairing_nonnegative: bool,
    /// Verdict of the Weitzenböck PSD test.
    pub dual_edm: bool,
    /// Samples where the criterion and the pairing disagree.
    pub disagreements: usize,
    pub samples: usize,
    /// First sampled vector violating the criterion.
    pub counterexample: Option<Vec<f64>>,
    pub min_margin: f64,
    pub min_margin_vector: Vec<f64>,
}

impl PerronCheck {
    /// All three oracles return the same verdict.
    pub fn oracles_agree(&self) -> bool {
        self.perron_nonnegative == self.pairing_nonnegative && self.perron_nonnegative == self.dual_edm
    }
}
