//! Command-line entry point. Exit codes: `0` success, `1` configuration or
//! usage error, `2` numerical failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_interp, RunConfig};
use crate::error::Result;
use crate::experiments::{self, Context, Report};

#[derive(Debug, Parser)]
#[command(name = "dform", version, about = "Navier–Stokes nudging and determining-form experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid points per side (overrides `solver.resolution`).
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Relaxation coefficient μ (overrides `nudging.mu`).
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Interpolant as `kind:N` with kind one of modal, volume, nodal.
    #[arg(long, global = true, value_name = "KIND:N")]
    pub interp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Free Navier–Stokes run with diagnostics and snapshots.
    Simulate,
    /// One synchronization experiment.
    Sync,
    /// Parallel synchronization sweep over (μ, interpolant).
    Sweep,
    /// W map, steady residual and determining-form evolution.
    Dform,
    /// Identities, inequality constants and the sup-norm lemma.
    Verify,
    /// Interpolant and nonlinear constants with the admissible thresholds.
    Constants,
}

impl Cli {
    /// The configuration file (or defaults) with the flag overrides applied.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.resolution {
            cfg.solver.resolution = n;
        }
        if let Some(mu) = self.mu {
            cfg.nudging.mu = mu;
        }
        if let Some(i) = &self.interp {
            let (kind, n) = parse_interp(i)?;
            cfg.interpolant.kind = kind;
            cfg.interpolant.resolution = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let ctx = Context::new(cli.run_config()?)?;
    match cli.command {
        Command::Simulate => experiments::simulate(&ctx),
        Command::Sync => experiments::sync(&ctx),
        Command::Sweep => experiments::sweep(&ctx),
        Command::Dform => experiments::dform(&ctx),
        Command::Verify => experiments::verify(&ctx),
        Command::Constants => experiments::constants(&ctx),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(report) => {
            for l in &report.lines {
                println!("{l}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
