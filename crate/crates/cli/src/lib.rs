//! Command-line front end for curvlab.
//!
//! Exit codes: 0 success, 1 usage, 2 domain, 3 verification failure.

pub mod commands;
pub mod config;
pub mod parse;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

use commands::{cmd_cone_check, cmd_eval, cmd_frame_scan, cmd_sweep, cmd_verify, Report};
use config::{Cli, Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
        }
    }
}

impl From<curvlab_core::Error> for CliError {
    fn from(e: curvlab_core::Error) -> Self {
        if e.is_domain() {
            CliError::Domain(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

/// Caps the global worker pool from CURVLAB_THREADS.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CURVLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("CURVLAB_THREADS must be a positive integer, got `{v}`")))?;
    // a pool already exists when called twice in one process; keep it
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(Report, RunConfig), CliError> {
    configure_threads()?;
    let flags = RunConfig::from_command(&cli.global, &cli.command);
    let cfg = match &cli.global.config {
        Some(path) => RunConfig::from_file(path)?.overlay(flags),
        None => flags,
    };
    let report = match &cli.command {
        Command::Eval(_) => Report::Eval(cmd_eval(&cfg)?),
        Command::Verify(a) => Report::Verify(cmd_verify(&a.suite, &cfg)?),
        Command::Sweep(_) => Report::Sweep(cmd_sweep(&cfg)?),
        Command::FrameScan(_) => Report::FrameScan(cmd_frame_scan(&cfg)?),
        Command::ConeCheck(_) => Report::ConeCheck(cmd_cone_check(&cfg)?),
    };
    Ok((report, cfg))
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<(), CliError> {
    let text = report.render(cfg.format_or(report.default_format()))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = execute(cli).and_then(|(report, cfg)| emit(&report, &cfg).map(|_| report.passed()));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("curvlab: {e}");
            e.exit_code()
        }
    }
}
