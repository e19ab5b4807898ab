//! Reproduction suites: each check compares a computed value with its
//! expected value under a tolerance.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{
    cone_min, copositive_2x2, dual_edm_test, edm_from_vector, perron_criterion_check, perron_weights, trace_pairing, Cone,
};
use crate::curvature::{
    curvature_from_jet, ricci, scalars, synthetic_tensor, transform_frame, ChernTensor, Convention, RicciKind,
    SyntheticKind,
};
use crate::error::{Error, Result};
use crate::frame_search::{extremize, invariance_test, SearchConfig};
use crate::functionals::{
    constant_identity_check, evaluate, fs_moment_check, hsc, matrices_from, rayleigh_bounds, ricci_qobc_bounds,
    ConstantHypothesis, FunctionalKind, IdentityReport,
};
use crate::linalg::{haar_unitary_from, RealMatrix};
use crate::metric::{jet_at, make_metric, FdConfig, MetricSpec, Point};
use crate::rng;
use crate::sweep::metric_frame_tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<VerifyCheck>,
    pub passed: bool,
}

impl VerifyReport {
    fn new(suite: &str, checks: Vec<VerifyCheck>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerifyReport { suite: suite.to_string(), checks, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let mut out = format!("suite {}\n", self.suite);
        out.push_str(&format!("{:<width$}  {:>16}  {:>16}  {:>9}  result\n", "check", "expected", "actual", "tol"));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:>16.10}  {:>16.10}  {:>9.1e}  {}\n",
                c.name,
                c.expected,
                c.actual,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            ));
        }
        out.push_str(if self.passed { "overall PASS\n" } else { "overall FAIL\n" });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Hopf,
    Tricerri,
    FubiniStudy,
    Cones,
    Identities,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Hopf, Suite::Tricerri, Suite::FubiniStudy, Suite::Cones, Suite::Identities];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hopf => "hopf",
            Suite::Tricerri => "tricerri",
            Suite::FubiniStudy => "fubini_study",
            Suite::Cones => "cones",
            Suite::Identities => "identities",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Unknown(s.to_string()))
    }
}

struct Checks(Vec<VerifyCheck>);

impl Checks {
    fn close(&mut self, name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) {
        let passed = (actual - expected).abs() <= tolerance;
        self.0.push(VerifyCheck { name: name.into(), expected, actual, tolerance, passed });
    }

    /// Relative closeness: |actual - expected| <= rel |expected|.
    fn within(&mut self, name: impl Into<String>, expected: f64, actual: f64, rel: f64) {
        let passed = (actual - expected).abs() <= rel * expected.abs();
        self.0.push(VerifyCheck { name: name.into(), expected, actual, tolerance: rel * expected.abs(), passed });
    }

    fn at_least(&mut self, name: impl Into<String>, bound: f64, actual: f64, tolerance: f64) {
        let passed = actual >= bound - tolerance;
        self.0.push(VerifyCheck { name: name.into(), expected: bound, actual, tolerance, passed });
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.close(name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0);
    }

    /// Counted identity checks as residual-vs-zero rows.
    fn report(&mut self, prefix: &str, r: &IdentityReport) {
        for c in r.checks.iter().filter(|c| !c.informational) {
            self.0.push(VerifyCheck {
                name: format!("{prefix}.{}", c.name),
                expected: 0.0,
                actual: c.max_residual,
                tolerance: c.tolerance,
                passed: c.passed,
            });
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn paper_hopf(z: &[Complex64]) -> Result<ChernTensor> {
    synthetic_tensor(&SyntheticKind::PaperHopf { z: z.to_vec() })
}

fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).amax()
}

fn search_cfg(seed: u64) -> SearchConfig {
    SearchConfig { restarts: 6, refine_steps: 40, seed, ..Default::default() }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::Hopf => hopf_suite(seed)?,
        Suite::Tricerri => tricerri_suite(seed)?,
        Suite::FubiniStudy => fubini_study_suite(seed)?,
        Suite::Cones => cones_suite(seed)?,
        Suite::Identities => identities_suite(seed)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                for mut ch in run_suite(s, seed)?.checks {
                    ch.name = format!("{}.{}", s.name(), ch.name);
                    all.push(ch);
                }
            }
            all
        }
    };
    Ok(VerifyReport::new(suite.name(), checks))
}

fn hopf_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut k = Checks(Vec::new());
    let field = make_metric(&MetricSpec::Hopf)?;
    let mut r = rng::seeded(seed);

    // finite-difference coordinate tensor vs the closed form
    let fd = FdConfig::default().forced();
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let radius = r.random_range(0.2..3.0);
        let w = rng::complex_normal_vec(&mut r, 2);
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let z: Vec<Complex64> = w.iter().map(|x| x * (radius / norm)).collect();
        let t = curvature_from_jet(&jet_at(&field, &Point::new(z.clone()), &fd)?)?;
        let closed = paper_hopf(&z)?;
        worst = worst.max(t.max_difference(&closed) / closed.max_abs());
    }
    k.close("fd_tensor_matches_closed_form", 0.0, worst, 1e-6);

    let z10 = [c(1.0), c(0.0)];
    let t10 = paper_hopf(&z10)?;
    let m = matrices_from(&t10);
    let r_exp = RealMatrix::from_row_slice(2, 2, &[0.0, 0.0, 4.0, 4.0]);
    let p_exp = RealMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 4.0]);
    k.close("r_matrix_at_1_0", 0.0, max_abs_diff(&m.r, &r_exp), 1e-12);
    k.close("p_matrix_at_1_0", 0.0, max_abs_diff(&m.p, &p_exp), 1e-12);
    let sc = scalars(&t10)?;
    k.close("scal_at_1_0", 8.0, sc.scal, 1e-12);
    k.close("altered_scal_at_1_0", 4.0, sc.altered_scal, 1e-12);
    let ric1 = ricci(&t10, RicciKind::First)?;
    k.close("ric1_22_at_1_0", 8.0, ric1[(1, 1)].re, 1e-12);

    let t11 = paper_hopf(&[c(1.0), c(1.0)])?;
    let m11 = matrices_from(&t11);
    let q = crate::functionals::form_matrix(FunctionalKind::AlteredHsc, &m11)?;
    let (lo, hi) = rayleigh_bounds(&q)?;
    k.close("altered_hsc_min_at_1_1", 0.5, lo, 1e-9);
    k.close("altered_hsc_max_at_1_1", 1.5, hi, 1e-9);

    // six listed components under the endomorphism-block action
    let listed = [[0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 1, 1], [1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1]];
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let u = haar_unitary_from(&mut r, 2);
        let tt = transform_frame(&t11, &u, Convention::Adjoint)?;
        for [i, j, kk, l] in listed {
            dev = dev.max((tt.get(i, j, kk, l) - t11.get(i, j, kk, l)).norm());
        }
    }
    k.close("adjoint_listed_components_invariant", 0.0, dev, 1e-9);
    for kind in [FunctionalKind::Rbc, FunctionalKind::AlteredRbc, FunctionalKind::AlteredHsc] {
        let rep = invariance_test(&t11, kind, Convention::Adjoint, 1000, seed, 1e-9)?;
        k.close(format!("adjoint_invariance_{kind}"), 0.0, rep.max_deviation, 1e-9);
    }

    for z in [[c(1.0), c(0.0)], [c(1.0), c(1.0)]] {
        let r2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        let t = paper_hopf(&z)?;
        let m = matrices_from(&t);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let tag = if r2 > 1.5 { "1_1" } else { "1_0" };
        k.close(format!("qobc_at_plus_{tag}"), 0.0, evaluate(FunctionalKind::Qobc, &m, &[s, s])?, 1e-9);
        k.close(format!("qobc_at_minus_{tag}"), 8.0 / (r2 * r2), evaluate(FunctionalKind::Qobc, &m, &[-s, s])?, 1e-9);
        let out = extremize(&t, FunctionalKind::Qobc, &Cone::Full, Convention::Full, &search_cfg(seed))?;
        k.within(format!("qobc_frame_sup_{tag}"), 8.0 / (r2 * r2), out.sup.value, 0.01);
        k.close(format!("qobc_frame_inf_{tag}"), 0.0, out.inf.value, 1e-9);
    }

    let mut aq = 0.0f64;
    for _ in 0..100 {
        let u = haar_unitary_from(&mut r, 2);
        let m = matrices_from(&transform_frame(&t11, &u, Convention::Adjoint)?);
        for _ in 0..10 {
            let v = rng::normal_vec(&mut r, 2);
            aq = aq.max(evaluate(FunctionalKind::AlteredQobc, &m, &v)?.abs());
        }
    }
    k.close("altered_qobc_vanishes", 0.0, aq, 1e-9);

    let rep = ricci_qobc_bounds(&t10, 1e-10, seed)?;
    let margin = |name: &str| {
        rep.check(name).map(|c| c.witnesses.iter().map(|w| w.lhs - w.rhs).fold(f64::INFINITY, f64::min)).unwrap_or(f64::NAN)
    };
    k.close("ricci_pair_margin_at_1_0", 16.0, margin("ricci_pair_bound"), 1e-10);
    k.close("scalar_margin_at_1_0", 8.0, margin("scalar_bound"), 1e-10);
    Ok(k.0)
}

fn tricerri_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut k = Checks(Vec::new());
    let field = make_metric(&MetricSpec::Tricerri)?;
    let mut r = rng::seeded(seed);
    let fd = FdConfig::with_step(1e-3).forced().richardson();
    for y in [1.0f64, 2.0] {
        let p = Point::new(vec![c(0.3), Complex64::new(0.2, y)]);
        let jet = jet_at(&field, &p, &fd)?;
        k.close(format!("second_derivative_term_im_{y}"), -1.5 / y.powi(4), -jet.ddg(1, 1, 1, 1).re, 1e-8);
    }

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let col = haar_unitary_from(&mut r, 2);
        let (b, d) = (col.matrix()[(0, 1)], col.matrix()[(1, 1)]);
        let y: f64 = r.random_range(0.5..3.0);
        let t = synthetic_tensor(&SyntheticKind::PaperTricerri { b, d, im_w: y })?;
        let (lo, hi) = rayleigh_bounds(&matrices_from(&t).r)?;
        let (b2, d2) = (b.norm_sqr(), d.norm_sqr());
        let root = (b2 * b2 + d2 * d2).sqrt();
        let s = -0.75 / y.powi(4);
        worst = worst.max((lo - s * (d2 + root)).abs()).max((hi - s * (d2 - root)).abs());
    }
    k.close("family_eigenvalues", 0.0, worst, 1e-9);

    for y in [1.0f64, 2.0] {
        let y4 = y.powi(4);
        let t = synthetic_tensor(&SyntheticKind::PaperTricerri { b: c(0.0), d: c(1.0), im_w: y })?;
        let cfg = search_cfg(seed);
        let rbc = extremize(&t, FunctionalKind::Rbc, &Cone::Full, Convention::Adjoint, &cfg)?;
        k.within(format!("rbc_sup_im_{y}"), 0.75 / y4, rbc.sup.value, 0.02);
        k.within(format!("rbc_inf_im_{y}"), -0.75 * (1.0 + 2f64.sqrt()) / y4, rbc.inf.value, 0.02);
        let alt = extremize(&t, FunctionalKind::AlteredRbc, &Cone::Full, Convention::Adjoint, &cfg)?;
        k.within(format!("altered_rbc_inf_im_{y}"), -1.5 / y4, alt.inf.value, 0.02);
        k.close(format!("altered_rbc_sup_im_{y}"), 0.0, alt.sup.value, 0.02 * 1.5 / y4);
    }
    let t = synthetic_tensor(&SyntheticKind::PaperTricerri { b: c(0.0), d: c(1.0), im_w: 1.0 })?;
    let rep = invariance_test(&t, FunctionalKind::AlteredRbc, Convention::Adjoint, 200, seed, 1e-6)?;
    k.flag("altered_rbc_frame_dependent", !rep.invariant);
    Ok(k.0)
}

fn fubini_study_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut k = Checks(Vec::new());
    let mut r = rng::seeded(seed);
    for n in [2usize, 3] {
        let field = make_metric(&MetricSpec::FubiniStudy { n })?;
        let p = Point::new(rng::complex_normal_vec(&mut r, n).into_iter().map(|x| x * 0.5).collect());
        for (tag, pt) in [("origin", Point::origin(n)), ("random_point", p)] {
            let t = metric_frame_tensor(&field, &pt, &FdConfig::default())?;
            let mut dev = 0.0f64;
            for _ in 0..100 {
                let w = rng::complex_normal_vec(&mut r, n);
                dev = dev.max((hsc(&t, &w)? - 2.0).abs());
            }
            k.close(format!("hsc_constant_n{n}_{tag}"), 0.0, dev, 1e-10);
            let rep = constant_identity_check(&t, ConstantHypothesis::ConstHsc(2.0), 1e-10, seed)?;
            k.report(&format!("const_hsc_n{n}_{tag}"), &rep);
            let sc = scalars(&t)?;
            k.close(format!("scal_n{n}_{tag}"), (n * (n + 1)) as f64, sc.scal, 1e-10);
            let ric: Vec<_> = RicciKind::ALL.iter().map(|&kind| ricci(&t, kind)).collect::<Result<_>>()?;
            let spread = ric.iter().map(|m| (m - &ric[0]).camax()).fold(0.0, f64::max);
            k.close(format!("ricci_coincide_n{n}_{tag}"), 0.0, spread, 1e-10);
        }
    }
    let t = metric_frame_tensor(&make_metric(&MetricSpec::FubiniStudy { n: 2 })?, &Point::origin(2), &FdConfig::default())?;
    let rep = ricci_qobc_bounds(&t, 1e-10, seed)?;
    let scal_check = rep.check("scalar_bound").expect("scalar bound present");
    let w = &scal_check.witnesses[0];
    k.at_least("scalar_bound_6_ge_2", w.rhs, w.lhs, 1e-10);
    k.close("scalar_bound_rhs", 2.0, w.rhs, 1e-10);
    for n in [2usize, 3] {
        k.report(&format!("moments_n{n}"), &fs_moment_check(n, 200_000, seed)?);
    }
    Ok(k.0)
}

fn random_matrix<R: Rng>(r: &mut R, n: usize, nonnegative: bool) -> RealMatrix {
    RealMatrix::from_fn(n, n, |_, _| {
        let x = rng::normal(r);
        if nonnegative {
            x.abs()
        } else {
            x
        }
    })
}

fn cones_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut k = Checks(Vec::new());
    let mut r = rng::seeded(seed);
    let id = RealMatrix::identity(2, 2);
    let swap = RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    k.flag("dual_edm_identity", dual_edm_test(&id, 1e-8)?);
    k.flag("dual_edm_swap", dual_edm_test(&swap, 1e-8)?);
    k.flag("dual_edm_negative_swap", !dual_edm_test(&(-&swap), 1e-8)?);
    let neg = perron_criterion_check(&(-&swap), 200, seed, 1e-8)?;
    let pairing = neg.counterexample.as_ref().map_or(f64::NAN, |v| trace_pairing(&(-&swap), v));
    k.close("perron_witness_pairing", -2.0, pairing, 1e-12);

    let pw = perron_weights(&edm_from_vector(&[0.0, 1.0, 2.0])?)?;
    let s6 = 6f64.sqrt();
    k.close("perron_weight_r2", (s6 - 2.0) / (2.0 + s6), pw.weights[0], 1e-12);
    k.close("perron_weight_r3", 4.0 / (2.0 + s6), pw.weights[1], 1e-12);

    let mut disagreements = 0usize;
    for n in [3usize, 4, 5] {
        for i in 0..40 {
            let m = random_matrix(&mut r, n, i % 2 == 0);
            let chk = perron_criterion_check(&m, 2000, seed.wrapping_add(i as u64), 1e-8)?;
            if !chk.oracles_agree() {
                disagreements += 1;
            }
        }
    }
    k.close("oracle_disagreements", 0.0, disagreements as f64, 0.0);

    let mut copos = 0usize;
    for _ in 0..200 {
        let m = random_matrix(&mut r, 2, false);
        let grid = cone_min(&m, &Cone::NonnegOrthant, 41)?.value >= -1e-9;
        if copositive_2x2(&m)? != grid {
            copos += 1;
        }
    }
    k.close("copositive_2x2_vs_grid_disagreements", 0.0, copos as f64, 0.0);
    Ok(k.0)
}

fn identities_suite(seed: u64) -> Result<Vec<VerifyCheck>> {
    let mut k = Checks(Vec::new());
    for (n, cc) in [(2usize, 2.0), (3, -1.5), (4, 0.7)] {
        let t = synthetic_tensor(&SyntheticKind::KahlerConstant { c: cc, n })?;
        k.report(&format!("kahler_constant_n{n}"), &constant_identity_check(&t, ConstantHypothesis::ConstHsc(cc), 1e-10, seed)?);
    }
    for (n, cc) in [(2usize, 3.0), (3, 3.0), (4, -2.0)] {
        let t = synthetic_tensor(&SyntheticKind::SkewPair { c: cc, n, seed })?;
        k.report(
            &format!("skew_pair_hbc_n{n}"),
            &constant_identity_check(&t, ConstantHypothesis::ConstAlteredHbc(cc), 1e-10, seed)?,
        );
        k.report(
            &format!("skew_pair_rbc_n{n}"),
            &constant_identity_check(&t, ConstantHypothesis::ConstAlteredRbc(cc / 2.0), 1e-10, seed)?,
        );
    }
    let t = synthetic_tensor(&SyntheticKind::SkewPair { c: 3.0, n: 3, seed: 7 })?;
    k.close("skew_pair_rbc_at_ones", 4.5, evaluate(FunctionalKind::Rbc, &matrices_from(&t), &[1.0, 1.0, 1.0])?, 1e-10);

    let mut r = rng::seeded(seed);
    let mut additivity = 0.0f64;
    for i in 0..50 {
        let t = synthetic_tensor(&SyntheticKind::Random { seed: seed.wrapping_add(i), n: 2 + (i as usize % 4) })?;
        let m = matrices_from(&t);
        let v = rng::normal_vec(&mut r, m.dim());
        let sum = evaluate(FunctionalKind::Rbc, &m, &v)? + evaluate(FunctionalKind::AlteredRbc, &m, &v)?;
        additivity = additivity.max((evaluate(FunctionalKind::AlteredHsc, &m, &v)? - sum).abs());
    }
    k.close("altered_hsc_additivity", 0.0, additivity, 1e-10);
    Ok(k.0)
}
