//! Subcommand implementations and their reports.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use curvlab_core::cone::{cone_min, copositive_2x2, perron_criterion_check, Cone, ConeMin, PerronCheck};
use curvlab_core::curvature::{scalars, Convention};
use curvlab_core::frame_search::{extremize, invariance_test, InvarianceReport, SearchOutcome};
use curvlab_core::functionals::{evaluate, form_matrix, hsc, matrices_from, rayleigh_bounds, weitzenbock, FunctionalKind};
use curvlab_core::linalg::{symmetric_eigen, RealMatrix};
use curvlab_core::metric::{make_metric, MetricSpec, Point};
use curvlab_core::sweep::{curvature_at, fmt_num, sweep, to_csv, SweepRow, SweepSpec};
use curvlab_core::verify::{run_suite, Suite, VerifyReport};

use crate::config::{Format, RunConfig};
use crate::parse::parse_matrix;
use crate::CliError;

fn rows(m: &RealMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn matrix_text(m: &[Vec<f64>]) -> String {
    let inner: Vec<String> =
        m.iter().map(|r| format!("[{}]", r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", inner.join(", "))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: MetricSpec,
    pub point: Point,
    pub paper_tensor: bool,
    pub functional: Option<FunctionalKind>,
    pub vector: Option<Vec<f64>>,
    pub cvector: Option<Point>,
    /// The functional at the given vector.
    pub value: Option<f64>,
    /// Extremes of the functional over real vectors in this frame.
    pub bounds: Option<(f64, f64)>,
    pub scal: f64,
    pub altered_scal: f64,
    pub r_matrix: Vec<Vec<f64>>,
    pub p_matrix: Vec<Vec<f64>>,
    pub imag_residual: f64,
    pub symmetry_residual: f64,
    pub paper_vs_metric: Option<f64>,
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalReport, CliError> {
    let spec = cfg.metric_spec()?;
    let field = make_metric(&spec)?;
    let point = cfg.point(field.dim())?;
    let pc = curvature_at(&field, &point, cfg.use_paper_tensor(), &cfg.fd()?)?;
    let m = matrices_from(&pc.tensor);
    let sc = scalars(&pc.tensor)?;
    let kind = cfg.functional()?;
    let vector = cfg.vector()?;
    let cvector = cfg.cvector()?;
    let n = field.dim();
    for len in vector.iter().map(Vec::len).chain(cvector.iter().map(Point::dim)) {
        if len != n {
            return Err(CliError::Usage(format!("vector has {len} entries, dimension is {n}")));
        }
    }
    if vector.is_some() && cvector.is_some() {
        return Err(CliError::Usage("give either --vector or --cvector, not both".into()));
    }
    let (value, bounds) = match kind {
        None => (None, None),
        Some(FunctionalKind::Hsc) => {
            let w: Option<Vec<Complex64>> = cvector
                .as_ref()
                .map(|p| p.coords.clone())
                .or_else(|| vector.as_ref().map(|v| v.iter().map(|&x| Complex64::new(x, 0.0)).collect()));
            (w.map(|w| hsc(&pc.tensor, &w)).transpose()?, None)
        }
        Some(k) => {
            if cvector.is_some() {
                return Err(CliError::Usage(format!("{k} takes a real --vector")));
            }
            let value = vector.as_ref().map(|v| evaluate(k, &m, v)).transpose()?;
            (value, Some(rayleigh_bounds(&form_matrix(k, &m)?)?))
        }
    };
    Ok(EvalReport {
        metric: spec,
        point,
        paper_tensor: pc.paper_tensor,
        functional: kind,
        vector,
        cvector,
        value,
        bounds,
        scal: sc.scal,
        altered_scal: sc.altered_scal,
        r_matrix: rows(&m.r),
        p_matrix: rows(&m.p),
        imag_residual: pc.imag_residual.max(sc.imaginary_residual),
        symmetry_residual: pc.symmetry_residual,
        paper_vs_metric: pc.paper_vs_metric,
    })
}

impl EvalReport {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("metric", self.metric.name().to_string()),
            ("point", self.point.to_string()),
            ("paper_tensor", self.paper_tensor.to_string()),
            ("functional", self.functional.map(|k| k.to_string()).unwrap_or_default()),
            ("value", opt(self.value)),
            ("min", opt(self.bounds.map(|b| b.0))),
            ("max", opt(self.bounds.map(|b| b.1))),
            ("scal", fmt_num(self.scal)),
            ("altered_scal", fmt_num(self.altered_scal)),
            ("r_matrix", matrix_text(&self.r_matrix)),
            ("p_matrix", matrix_text(&self.p_matrix)),
            ("imag_residual", fmt_num(self.imag_residual)),
            ("symmetry_residual", fmt_num(self.symmetry_residual)),
            ("paper_vs_metric", opt(self.paper_vs_metric)),
        ]
    }
}

pub fn cmd_verify(suite: &str, cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let suite: Suite = suite.parse()?;
    Ok(run_suite(suite, cfg.seed())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepReport, CliError> {
    let metric = cfg.metric_spec()?;
    let n = metric.dim();
    let base = match cfg.point {
        Some(_) => cfg.point(n)?,
        None => Point::origin(n),
    };
    let spec = SweepSpec {
        metric,
        base,
        axes: cfg.axes()?,
        functionals: cfg.functionals(&FunctionalKind::ALL[1..])?,
        cone: cfg.cone()?,
        convention: cfg.convention()?,
        search: cfg.search(),
        use_paper_tensor: cfg.use_paper_tensor(),
        fd: cfg.fd()?,
    };
    if spec.functionals.contains(&FunctionalKind::Hsc) && spec.cone != Cone::Full {
        return Err(CliError::Usage("hsc cannot be restricted to a cone".into()));
    }
    let rows = sweep(&spec)?;
    Ok(SweepReport { spec, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameScanReport {
    pub metric: MetricSpec,
    pub point: Point,
    pub paper_tensor: bool,
    pub functional: FunctionalKind,
    pub cone: Cone,
    pub convention: Convention,
    pub outcome: SearchOutcome,
    pub invariance: Option<InvarianceReport>,
}

pub fn cmd_frame_scan(cfg: &RunConfig) -> Result<FrameScanReport, CliError> {
    let metric = cfg.metric_spec()?;
    let field = make_metric(&metric)?;
    let point = cfg.point(field.dim())?;
    let kind = cfg.functional()?.ok_or_else(|| CliError::Usage("--functional is required".into()))?;
    let pc = curvature_at(&field, &point, cfg.use_paper_tensor(), &cfg.fd()?)?;
    let cone = cfg.cone()?;
    let convention = cfg.convention()?;
    let outcome = extremize(&pc.tensor, kind, &cone, convention, &cfg.search())?;
    let invariance = cfg
        .invariance_samples
        .map(|s| invariance_test(&pc.tensor, kind, convention, s, cfg.seed(), cfg.tol.unwrap_or(1e-9)))
        .transpose()?;
    Ok(FrameScanReport { metric, point, paper_tensor: pc.paper_tensor, functional: kind, cone, convention, outcome, invariance })
}

impl FrameScanReport {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let vec_text = |v: &[f64]| format!("({})", v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", "));
        let mut out = vec![
            ("metric", self.metric.name().to_string()),
            ("point", self.point.to_string()),
            ("paper_tensor", self.paper_tensor.to_string()),
            ("functional", self.functional.to_string()),
            ("cone", self.cone.name().to_string()),
            ("convention", self.convention.to_string()),
            ("inf", fmt_num(self.outcome.inf.value)),
            ("inf_vector", vec_text(&self.outcome.inf.vector)),
            ("inf_restart", self.outcome.inf.restart.to_string()),
            ("sup", fmt_num(self.outcome.sup.value)),
            ("sup_vector", vec_text(&self.outcome.sup.vector)),
            ("sup_restart", self.outcome.sup.restart.to_string()),
            ("restarts", self.outcome.restarts.len().to_string()),
            ("monotone", self.outcome.restarts.iter().all(|s| s.monotone).to_string()),
        ];
        if let Some(inv) = &self.invariance {
            out.push(("invariant", inv.invariant.to_string()));
            out.push(("max_deviation", fmt_num(inv.max_deviation)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCheckReport {
    pub matrix: Vec<Vec<f64>>,
    pub cone: Cone,
    pub cone_min: ConeMin,
    pub weitzenbock_min_eigenvalue: f64,
    pub perron: PerronCheck,
    pub copositive_2x2: Option<bool>,
}

pub fn cmd_cone_check(cfg: &RunConfig) -> Result<ConeCheckReport, CliError> {
    let text = cfg.matrix.as_deref().ok_or_else(|| CliError::Usage("--matrix is required".into()))?;
    let m = parse_matrix(text)?;
    if m.nrows() < 2 {
        return Err(CliError::Usage("cone-check needs n >= 2".into()));
    }
    let cone = cfg.cone()?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let cm = cone_min(&m, &cone, cfg.resolution.unwrap_or(curvlab_core::cone::DEFAULT_RESOLUTION))?;
    let w = symmetric_eigen(&weitzenbock(&m))?.min();
    let perron = perron_criterion_check(&m, cfg.samples.unwrap_or(10_000), cfg.seed(), tol)?;
    let copositive = if m.nrows() == 2 { Some(copositive_2x2(&m)?) } else { None };
    Ok(ConeCheckReport { matrix: rows(&m), cone, cone_min: cm, weitzenbock_min_eigenvalue: w, perron, copositive_2x2: copositive })
}

impl ConeCheckReport {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("matrix", matrix_text(&self.matrix)),
            ("cone", self.cone.name().to_string()),
            ("cone_min", fmt_num(self.cone_min.value)),
            (
                "cone_argmin",
                format!("({})", self.cone_min.argmin.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")),
            ),
            ("weitzenbock_min_eigenvalue", fmt_num(self.weitzenbock_min_eigenvalue)),
            ("dual_edm", self.perron.dual_edm.to_string()),
            ("perron_nonnegative", self.perron.perron_nonnegative.to_string()),
            ("pairing_nonnegative", self.perron.pairing_nonnegative.to_string()),
            ("oracles_agree", self.perron.oracles_agree().to_string()),
            ("samples", self.perron.samples.to_string()),
            (
                "counterexample",
                self.perron
                    .counterexample
                    .as_ref()
                    .map(|v| format!("({})", v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(", ")))
                    .unwrap_or_default(),
            ),
            ("copositive_2x2", self.copositive_2x2.map(|b| b.to_string()).unwrap_or_default()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum Report {
    Eval(EvalReport),
    Verify(VerifyReport),
    Sweep(SweepReport),
    FrameScan(FrameScanReport),
    ConeCheck(ConeCheckReport),
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pairs_text(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|p| p.0.len()).max().unwrap_or(0);
    pairs.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn pairs_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{}", csv_field(v));
    }
    out
}

impl Report {
    /// Default output format per subcommand.
    pub fn default_format(&self) -> Format {
        match self {
            Report::Sweep(_) => Format::Csv,
            _ => Format::Text,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Report::Verify(v) => v.passed,
            _ => true,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        if format == Format::Json {
            let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            return Ok(s);
        }
        let csv = format == Format::Csv;
        Ok(match self {
            Report::Eval(r) => {
                if csv {
                    pairs_csv(&r.pairs())
                } else {
                    pairs_text(&r.pairs())
                }
            }
            Report::FrameScan(r) => {
                if csv {
                    pairs_csv(&r.pairs())
                } else {
                    pairs_text(&r.pairs())
                }
            }
            Report::ConeCheck(r) => {
                if csv {
                    pairs_csv(&r.pairs())
                } else {
                    pairs_text(&r.pairs())
                }
            }
            Report::Sweep(r) => to_csv(&r.rows, r.spec.metric.dim(), &r.spec.functionals),
            Report::Verify(r) => {
                if csv {
                    let mut out = String::from("check,expected,actual,tolerance,passed\n");
                    for c in &r.checks {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{}",
                            csv_field(&c.name),
                            fmt_num(c.expected),
                            fmt_num(c.actual),
                            fmt_num(c.tolerance),
                            c.passed
                        );
                    }
                    out
                } else {
                    r.to_text()
                }
            }
        })
    }
}
