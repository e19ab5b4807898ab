//! Point evaluation pipeline and grid sweeps.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::curvature::{coordinate_to_frame, curvature_from_jet, scalars, synthetic_tensor, ChernTensor, Convention, SyntheticKind};
use crate::error::{Error, Result};
use crate::frame_search::{extremize, SearchConfig};
use crate::functionals::{matrices_from, FunctionalKind};
use crate::metric::{jet_at, make_metric, FdConfig, MetricField, MetricSpec, Point};

/// Frame-component curvature at a point, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCurvature {
    pub point: Point,
    pub tensor: ChernTensor,
    pub paper_tensor: bool,
    pub symmetry_residual: f64,
    pub imag_residual: f64,
    /// Largest entrywise gap between the closed-form and metric-derived
    /// frame tensors, when both exist.
    pub paper_vs_metric: Option<f64>,
}

/// The closed-form frame tensor for a catalog metric, if one exists.
pub fn paper_tensor(spec: &MetricSpec, p: &Point) -> Result<Option<ChernTensor>> {
    let kind = match spec {
        MetricSpec::Hopf => SyntheticKind::PaperHopf { z: p.coords.clone() },
        MetricSpec::Tricerri => SyntheticKind::PaperTricerri {
            b: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
            im_w: p.coords[1].im,
        },
        _ => return Ok(None),
    };
    synthetic_tensor(&kind).map(Some)
}

/// metric -> jet -> coordinate curvature -> unitary frame.
pub fn metric_frame_tensor(field: &MetricField, p: &Point, fd: &FdConfig) -> Result<ChernTensor> {
    let jet = jet_at(field, p, fd)?;
    coordinate_to_frame(&curvature_from_jet(&jet)?)
}

pub fn curvature_at(field: &MetricField, p: &Point, use_paper_tensor: bool, fd: &FdConfig) -> Result<PointCurvature> {
    field.check_domain(p)?;
    let derived = metric_frame_tensor(field, p, fd)?;
    let paper = match field.spec() {
        Some(spec) => paper_tensor(spec, p)?,
        None => None,
    };
    if use_paper_tensor && paper.is_none() {
        return Err(Error::usage(format!("no closed-form tensor exists for metric `{}`", field.name())));
    }
    let paper_vs_metric = paper.as_ref().map(|t| t.max_difference(&derived));
    let (tensor, is_paper) = match paper {
        Some(t) if use_paper_tensor => (t, true),
        _ => (derived, false),
    };
    let symmetry_residual = tensor.hermitian_residual();
    let imag_residual = matrices_from(&tensor).imag_residual;
    Ok(PointCurvature {
        point: p.clone(),
        tensor,
        paper_tensor: is_paper,
        symmetry_residual,
        imag_residual,
        paper_vs_metric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

/// One grid axis: `coord:re|im:start:end:count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub coord: usize,
    pub part: Part,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| if k + 1 == self.count { self.end } else { self.start + step * k as f64 }).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::usage(format!("axis `{s}` must look like coord:re|im:start:end:count"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let coord = parts[0].trim().parse().map_err(|_| bad())?;
        let part = match parts[1].trim() {
            "re" => Part::Re,
            "im" => Part::Im,
            _ => return Err(bad()),
        };
        let start: f64 = parts[2].trim().parse().map_err(|_| bad())?;
        let end: f64 = parts[3].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[4].trim().parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !end.is_finite() {
            return Err(bad());
        }
        Ok(Axis { coord, part, start, end, count })
    }
}

/// Grid points in row-major order (first axis slowest).
pub fn grid_points(base: &Point, axes: &[Axis]) -> Result<Vec<Point>> {
    for a in axes {
        if a.coord >= base.dim() {
            return Err(Error::usage(format!("axis coordinate {} out of range for dimension {}", a.coord, base.dim())));
        }
    }
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let total: usize = values.iter().map(Vec::len).product();
    if total > 100_000 {
        return Err(Error::usage(format!("grid has {total} points; the limit is 100000")));
    }
    let mut out = Vec::with_capacity(total);
    for mut flat in 0..total {
        let mut p = base.clone();
        for (a, vals) in axes.iter().zip(&values).rev() {
            let x = vals[flat % vals.len()];
            flat /= vals.len();
            let c = &mut p.coords[a.coord];
            match a.part {
                Part::Re => c.re = x,
                Part::Im => c.im = x,
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub metric: MetricSpec,
    pub base: Point,
    pub axes: Vec<Axis>,
    pub functionals: Vec<FunctionalKind>,
    pub cone: Cone,
    pub convention: Convention,
    pub search: SearchConfig,
    pub use_paper_tensor: bool,
    pub fd: FdConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRange {
    pub kind: FunctionalKind,
    pub inf: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub point: Point,
    pub scal: f64,
    pub altered_scal: f64,
    pub ranges: Vec<FunctionalRange>,
    pub symmetry_residual: f64,
    pub imag_residual: f64,
    pub paper_vs_metric: Option<f64>,
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let field = make_metric(&spec.metric)?;
    if spec.base.dim() != field.dim() {
        return Err(Error::Dimension { expected: field.dim(), got: spec.base.dim() });
    }
    let points = grid_points(&spec.base, &spec.axes)?;
    let outside: Vec<String> = points.iter().filter(|p| !field.contains(p)).map(|p| p.to_string()).collect();
    if !outside.is_empty() {
        return Err(Error::domain(format!(
            "{} grid point(s) outside the domain of `{}`: {}",
            outside.len(),
            field.name(),
            outside.join(", ")
        )));
    }
    points
        .into_par_iter()
        .enumerate()
        .map(|(index, p)| {
            let pc = curvature_at(&field, &p, spec.use_paper_tensor, &spec.fd)?;
            let sc = scalars(&pc.tensor)?;
            let ranges = spec
                .functionals
                .iter()
                .map(|&kind| {
                    let out = extremize(&pc.tensor, kind, &spec.cone, spec.convention, &spec.search)?;
                    Ok(FunctionalRange { kind, inf: out.inf.value, sup: out.sup.value })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                index,
                point: p,
                scal: sc.scal,
                altered_scal: sc.altered_scal,
                ranges,
                symmetry_residual: pc.symmetry_residual,
                imag_residual: pc.imag_residual.max(sc.imaginary_residual),
                paper_vs_metric: pc.paper_vs_metric,
            })
        })
        .collect()
}

/// index, then re/im per coordinate, scal, altered_scal, inf/sup per
/// functional, symmetry_residual, imag_residual, paper_vs_metric.
pub fn csv_header(n: usize, functionals: &[FunctionalKind]) -> String {
    let mut cols = vec!["index".to_string()];
    for i in 0..n {
        cols.push(format!("re_z{i}"));
        cols.push(format!("im_z{i}"));
    }
    cols.push("scal".into());
    cols.push("altered_scal".into());
    for k in functionals {
        cols.push(format!("{}_inf", k.name()));
        cols.push(format!("{}_sup", k.name()));
    }
    cols.extend(["symmetry_residual", "imag_residual", "paper_vs_metric"].map(String::from));
    cols.join(",")
}

/// Twelve significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    // + 0.0 normalizes -0
    let rounded: f64 = format!("{x:.11e}").parse::<f64>().unwrap_or(x) + 0.0;
    let a = rounded.abs();
    if a == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn to_csv(rows: &[SweepRow], n: usize, functionals: &[FunctionalKind]) -> String {
    let mut out = csv_header(n, functionals);
    out.push('\n');
    for r in rows {
        let mut cols = vec![r.index.to_string()];
        for c in &r.point.coords {
            cols.push(fmt_num(c.re));
            cols.push(fmt_num(c.im));
        }
        cols.push(fmt_num(r.scal));
        cols.push(fmt_num(r.altered_scal));
        for g in &r.ranges {
            cols.push(fmt_num(g.inf));
            cols.push(fmt_num(g.sup));
        }
        cols.push(fmt_num(r.symmetry_residual));
        cols.push(fmt_num(r.imag_residual));
        cols.push(r.paper_vs_metric.map(fmt_num).unwrap_or_default());
        let _ = writeln!(out, "{}", cols.join(","));
    }
    out
}
