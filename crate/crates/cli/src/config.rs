//! Run configuration: clap flags layered over an optional JSON file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use curvlab_core::cone::{Cone, DEFAULT_RESOLUTION};
use curvlab_core::curvature::Convention;
use curvlab_core::frame_search::SearchConfig;
use curvlab_core::functionals::FunctionalKind;
use curvlab_core::metric::{FdConfig, MetricSpec, Point};
use curvlab_core::sweep::Axis;

use crate::parse::{parse_point, parse_real_list};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Chern curvature functionals of Hermitian metrics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// JSON file whose keys mirror the flag names; flags win on conflict.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate curvature quantities at one point.
    Eval(EvalArgs),
    /// Run a reproduction suite: hopf, tricerri, fubini_study, cones, identities, all.
    Verify(VerifyArgs),
    /// Sweep a grid of points and tabulate curvature ranges.
    Sweep(SweepArgs),
    /// Extremize a functional over unitary frames at one point.
    FrameScan(FrameScanArgs),
    /// Cone and dual-EDM checks for a real matrix.
    ConeCheck(ConeCheckArgs),
}

#[derive(Debug, Args, Default)]
pub struct MetricArgs {
    /// euclidean, fubini_study, hopf, tricerri, conformal_exp, conformal_poly
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Conformal factor scale.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Comma-separated complex coordinates, e.g. `1,0.5-2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Use the closed-form tensors stated for the Hopf and Tricerri examples.
    #[arg(long)]
    pub use_paper_tensor: bool,
    /// Force finite differences with this step.
    #[arg(long)]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SearchArgs {
    /// full, orthant, monotone
    #[arg(long)]
    pub cone: Option<String>,
    /// full or adjoint
    #[arg(long)]
    pub convention: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub refine_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long)]
    pub functional: Option<String>,
    /// Real vector for the quadratic forms.
    #[arg(long, allow_hyphen_values = true)]
    pub vector: Option<String>,
    /// Complex vector for HSC.
    #[arg(long, allow_hyphen_values = true)]
    pub cvector: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Comma-separated functionals (default: all quadratic ones).
    #[arg(long)]
    pub functional: Option<String>,
    /// `coord:re|im:start:end:count`, repeatable; the first axis varies slowest.
    #[arg(long, allow_hyphen_values = true)]
    pub axis: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FrameScanArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub functional: Option<String>,
    /// Also measure frame dependence over this many Haar frames.
    #[arg(long)]
    pub invariance_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConeCheckArgs {
    /// JSON rows `[[a,b],[c,d]]` or inline CSV `a,b;c,d`.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub cone: Option<String>,
    /// Sampled EDMs for the Perron-weight criterion.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Grid resolution for cone minimization.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Every setting a subcommand may read. Field names match the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub metric: Option<String>,
    pub dim: Option<usize>,
    pub scale: Option<f64>,
    pub point: Option<String>,
    pub use_paper_tensor: Option<bool>,
    pub fd_step: Option<f64>,
    pub functional: Option<String>,
    pub vector: Option<String>,
    pub cvector: Option<String>,
    pub cone: Option<String>,
    pub convention: Option<String>,
    pub restarts: Option<usize>,
    pub refine_steps: Option<usize>,
    pub axis: Option<Vec<String>>,
    pub invariance_samples: Option<usize>,
    pub matrix: Option<String>,
    pub samples: Option<usize>,
    pub resolution: Option<usize>,
    pub tol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(self, top; metric, dim, scale, point, use_paper_tensor, fd_step, functional, vector, cvector,
            cone, convention, restarts, refine_steps, axis, invariance_samples, matrix, samples, resolution, tol,
            format, out, seed);
        self
    }

    fn with_metric(mut self, m: &MetricArgs) -> Self {
        self.metric = m.metric.clone();
        self.dim = m.dim;
        self.scale = m.scale;
        self.point = m.point.clone();
        self.use_paper_tensor = m.use_paper_tensor.then_some(true);
        self.fd_step = m.fd_step;
        self
    }

    fn with_search(mut self, s: &SearchArgs) -> Self {
        self.cone = s.cone.clone();
        self.convention = s.convention.clone();
        self.restarts = s.restarts;
        self.refine_steps = s.refine_steps;
        self
    }

    /// The settings given on the command line.
    pub fn from_command(global: &GlobalArgs, command: &Command) -> Self {
        let mut c = RunConfig { format: global.format, out: global.out.clone(), seed: global.seed, ..Default::default() };
        match command {
            Command::Eval(a) => {
                c = c.with_metric(&a.metric);
                c.functional = a.functional.clone();
                c.vector = a.vector.clone();
                c.cvector = a.cvector.clone();
            }
            Command::Sweep(a) => {
                c = c.with_metric(&a.metric).with_search(&a.search);
                c.functional = a.functional.clone();
                c.axis = (!a.axis.is_empty()).then(|| a.axis.clone());
            }
            Command::FrameScan(a) => {
                c = c.with_metric(&a.metric).with_search(&a.search);
                c.functional = a.functional.clone();
                c.invariance_samples = a.invariance_samples;
            }
            Command::ConeCheck(a) => {
                c.matrix = a.matrix.clone();
                c.cone = a.cone.clone();
                c.samples = a.samples;
                c.resolution = a.resolution;
                c.tol = a.tol;
            }
            Command::Verify(_) => {}
        }
        c
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn metric_spec(&self) -> Result<MetricSpec, CliError> {
        let name = self.metric.as_deref().ok_or_else(|| CliError::Usage("--metric is required".into()))?;
        let dim = match (self.dim, &self.point) {
            (Some(n), _) => Some(n),
            (None, Some(p)) if !matches!(name, "hopf" | "tricerri") => Some(parse_point(p)?.dim()),
            _ => None,
        };
        Ok(MetricSpec::from_name(name, dim, self.scale)?)
    }

    pub fn point(&self, n: usize) -> Result<Point, CliError> {
        let p = match &self.point {
            Some(s) => parse_point(s)?,
            None => return Err(CliError::Usage("--point is required".into())),
        };
        if p.dim() != n {
            return Err(CliError::Usage(format!("point has {} coordinates, metric dimension is {n}", p.dim())));
        }
        Ok(p)
    }

    pub fn fd(&self) -> Result<FdConfig, CliError> {
        Ok(match self.fd_step {
            Some(h) if !(h.is_finite() && h > 0.0) => return Err(CliError::Usage(format!("bad --fd-step {h}"))),
            Some(h) => FdConfig::with_step(h).forced(),
            None => FdConfig::default(),
        })
    }

    pub fn use_paper_tensor(&self) -> bool {
        self.use_paper_tensor.unwrap_or(false)
    }

    pub fn functional(&self) -> Result<Option<FunctionalKind>, CliError> {
        self.functional.as_deref().map(|s| s.trim().parse().map_err(CliError::from)).transpose()
    }

    pub fn functionals(&self, default: &[FunctionalKind]) -> Result<Vec<FunctionalKind>, CliError> {
        match &self.functional {
            None => Ok(default.to_vec()),
            Some(s) => s.split(',').map(|k| k.trim().parse().map_err(CliError::from)).collect(),
        }
    }

    pub fn vector(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.vector.as_deref().map(parse_real_list).transpose()
    }

    pub fn cvector(&self) -> Result<Option<Point>, CliError> {
        self.cvector.as_deref().map(parse_point).transpose()
    }

    pub fn cone(&self) -> Result<Cone, CliError> {
        match &self.cone {
            None => Ok(Cone::Full),
            Some(s) => s.parse().map_err(CliError::from),
        }
    }

    pub fn convention(&self) -> Result<Convention, CliError> {
        match &self.convention {
            None => Ok(Convention::Full),
            Some(s) => s.parse().map_err(CliError::from),
        }
    }

    pub fn search(&self) -> SearchConfig {
        let d = SearchConfig::default();
        SearchConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            refine_steps: self.refine_steps.unwrap_or(d.refine_steps),
            seed: self.seed(),
            cone_resolution: self.resolution.unwrap_or(DEFAULT_RESOLUTION),
            ..d
        }
    }

    pub fn axes(&self) -> Result<Vec<Axis>, CliError> {
        match &self.axis {
            None => Err(CliError::Usage("sweep needs at least one --axis".into())),
            Some(v) => v.iter().map(|a| a.parse().map_err(CliError::from)).collect(),
        }
    }
}
