//! `cavelim` command-line front end.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 validity
//! failure under `--strict`, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cavelim", version, about = "Adiabatic elimination of emitter ensembles in cavity QED")]
pub struct Cli {
    #[command(flatten)]
    pub global: Globals,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Globals {
    /// TOML config file (for `sweep`, the sweep file).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "cavelim-out")]
    pub out_dir: PathBuf,
    /// Treat a failing validity verdict as an error (exit status 2).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for sweeps; defaults to the available parallelism.
    #[arg(long, global = true, env = "CAVELIM_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective subsystem parameters and validity diagnostics.
    Eliminate(ValidityArgs),
    /// Validity diagnostics only.
    Validate(ValidityArgs),
    /// Cavity transmission spectrum on a laser-frequency grid.
    Spectrum(SpectrumArgs),
    /// Time evolution of the full or effective model.
    Dynamics(DynamicsArgs),
    /// Parameter sweep described by a sweep file.
    Sweep,
    /// Dimensionless dipole couplings g and f over a (θ, ξ) grid.
    DipoleMap(DipoleMapArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidityArgs {
    /// Mean photon number setting the amplitude scale.
    #[arg(long, default_value_t = 1.0)]
    pub n_bar: f64,
}

/// `min,max,count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        sweep::linspace(self.min, self.max, self.count)
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [min, max, count] = parts[..] else {
        return Err("expected min,max,count".into());
    };
    let min: f64 = min.parse().map_err(|e| format!("min: {e}"))?;
    let max: f64 = max.parse().map_err(|e| format!("max: {e}"))?;
    let count: usize = count.parse().map_err(|e| format!("count: {e}"))?;
    if !min.is_finite() || !max.is_finite() || max < min {
        return Err("need finite min <= max".into());
    }
    if count == 0 {
        return Err("count must be positive".into());
    }
    Ok(Grid { min, max, count })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModeArg {
    /// Steady state of the effective system.
    Exact,
    /// Sum over the two polariton poles.
    Polariton,
    /// Steady state of the full linear system at each laser frequency.
    LaserFrame,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Laser frequencies as `min,max,count`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, default_value = "-5,5,1001")]
    pub grid: Grid,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: SpectrumModeArg,
    /// Drive strength.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialArg {
    Vacuum,
    AExcited,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Full,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverArg {
    /// Density-matrix master equation.
    Quantum,
    /// Linear equations for the amplitudes.
    Classical,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DynamicsArgs {
    #[arg(long, value_enum, default_value = "a-excited")]
    pub initial: InitialArg,
    /// Coherent amplitude, real part.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha_re: f64,
    /// Coherent amplitude, imaginary part.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha_im: f64,
    #[arg(long, value_enum, default_value = "effective")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "quantum")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Relative tolerance for adaptive steps; fixed steps when absent.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Photon-number cutoff.
    #[arg(long, default_value_t = 2)]
    pub n_max: usize,
    /// Largest Hilbert-space dimension accepted for the full model.
    #[arg(long, default_value_t = cavelim::quantum::DEFAULT_DIM_CAP)]
    pub dim_cap: usize,
    /// Drive strength; requires `--omega-l`.
    #[arg(long, requires = "omega_l")]
    pub eta: Option<f64>,
    /// Laser frequency.
    #[arg(long, requires = "eta", allow_hyphen_values = true)]
    pub omega_l: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DipoleMapArgs {
    /// Angles from the dipole axis as `min,max,count`.
    #[arg(long, value_parser = parse_grid, default_value = "0,3.141592653589793,91")]
    pub theta: Grid,
    /// Dimensionless separations `k r` as `min,max,count`.
    #[arg(long, value_parser = parse_grid, default_value = "0.05,6.283185307179586,126")]
    pub xi: Grid,
    /// Clamp g to the display window.
    #[arg(long)]
    pub clamp: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavelim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
