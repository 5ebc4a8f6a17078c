//! Command-line front end; every command writes data files plus a [`RunManifest`].

mod commands;
mod manifest;
mod tau_table;
mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::BoundaryData;
use crate::sampler::{InitialState, SweepOrder};

pub use manifest::{RunManifest, MANIFEST_SCHEMA};
pub use tau_table::TauTable;
pub use verify::{run_suite, CheckResult, Suite, SuiteReport};

/// Version of the CSV and JSON layouts documented under `schemas/`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "laplace-pin", version, about = "Laplacian pinning model: minimisers, sampling, free energy, verification")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// Output directory, created if missing.
    #[arg(long, global = true, env = "LAPLACE_PIN_OUT", default_value = "laplace-pin-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Minimiser set of the rate function at one τ, with profile tables.
    Minimise(MinimiseArgs),
    /// Regime and minimiser kinds along a τ grid, with bisected phase boundaries.
    PhaseSweep(PhaseSweepArgs),
    /// Heat-bath chains for the pinned Gibbs measure.
    Sample(SampleArgs),
    /// Exact or estimated per-site free energy τ_N(ε).
    FreeEnergy(FreeEnergyArgs),
    /// Runs a verification suite and writes a pass/fail report.
    Verify(VerifyArgs),
    /// Re-runs the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Minimise(_) => "minimise",
            Command::PhaseSweep(_) => "phase-sweep",
            Command::Sample(_) => "sample",
            Command::FreeEnergy(_) => "free-energy",
            Command::Verify(_) => "verify",
            Command::Replay(_) => "replay",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample(s) => Some(s.seed),
            Command::FreeEnergy(f) => Some(f.seed),
            Command::Verify(v) => Some(v.seed),
            _ => None,
        }
    }
}

/// Left data `(a, α)` with either right data `(b, β)` or a free right end.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryArgs {
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, requires = "beta", conflicts_with = "free_right")]
    pub b: Option<f64>,
    #[arg(long, requires = "b", conflicts_with = "free_right")]
    pub beta: Option<f64>,
    /// Free right end; otherwise Dirichlet with `(b, β)`, default `(0, 0)`.
    #[arg(long)]
    pub free_right: bool,
}

impl BoundaryArgs {
    pub fn boundary(&self) -> BoundaryData {
        if self.free_right {
            BoundaryData::free_right(self.a, self.alpha)
        } else {
            BoundaryData::dirichlet(self.a, self.alpha, self.b.unwrap_or(0.0), self.beta.unwrap_or(0.0))
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
#[command(group(ArgGroup::new("reward").required(true).args(["tau", "eps"])))]
pub struct MinimiseArgs {
    #[command(flatten)]
    pub bc: BoundaryArgs,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Pinning strength, converted through `--tau-from`.
    #[arg(long, requires = "tau_from")]
    pub eps: Option<f64>,
    /// CSV with `epsilon` and `tau` columns, as written by `free-energy`.
    #[arg(long)]
    pub tau_from: Option<PathBuf>,
    /// Grid intervals of the profile tables.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepBoundary {
    /// Free right end.
    Free,
    /// Dirichlet data `(a, α, a, -α)`.
    Symmetric,
    /// Dirichlet data `(a, α, b, β)` with fixed `(b, β)`.
    Dirichlet,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct PhaseSweepArgs {
    /// Comma-separated left heights.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub a: Vec<f64>,
    /// Comma-separated left slopes.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub alpha: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SweepBoundary::Free)]
    pub boundary: SweepBoundary,
    #[arg(long, default_value_t = 0.0)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tau_max: f64,
    /// Grid intervals in τ.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub bc: BoundaryArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 100)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub replicas: u64,
    #[arg(long, value_enum, default_value_t = SweepOrder::ForwardBackward)]
    pub order: SweepOrder,
    #[arg(long, value_enum, default_value_t = InitialState::Minimiser)]
    pub init: InitialState,
    /// Appends the grid profile `h_0..h_N` to every trace row.
    #[arg(long)]
    pub profiles: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FreeEnergyMode {
    /// Enumeration over pinning sets.
    Exact,
    /// Thermodynamic integration with extrapolation in 1/N.
    Estimate,
    /// Pin densities from unpinned and pinned starts.
    Scan,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FreeEnergyArgs {
    #[arg(long, value_enum, default_value_t = FreeEnergyMode::Exact)]
    pub mode: FreeEnergyMode,
    /// Comma-separated system sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Comma-separated pinning strengths; overrides the geometric range.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 13)]
    pub eps_count: usize,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 200)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 4)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub half_nodes: usize,
}

impl FreeEnergyArgs {
    fn epsilon_grid(&self) -> Result<Vec<f64>> {
        if !self.eps.is_empty() {
            return Ok(self.eps.clone());
        }
        if !(self.eps_min > 0.0 && self.eps_max > self.eps_min) || self.eps_count < 2 {
            return domain("geometric ε grid needs 0 < eps-min < eps-max and eps-count ≥ 2");
        }
        let (lo, hi) = (self.eps_min.ln(), self.eps_max.ln());
        Ok((0..self.eps_count)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.eps_count - 1) as f64).exp())
            .collect())
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Core)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// `{:.16e}`: seventeen significant digits, enough to round-trip every `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Exit status of a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A verification suite ran to completion with failures.
    ChecksFailed,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    execute(&cli.command, &cli.out)
}

/// Runs `command` writing into `out`, then records the manifest.
pub fn execute(command: &Command, out: &Path) -> Result<Outcome> {
    if let Command::Replay(r) = command {
        let manifest = RunManifest::read(&r.manifest)?;
        return execute(&manifest.config, out);
    }
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let (outputs, outcome) = match command {
        Command::Minimise(a) => (commands::minimise(a, out)?, Outcome::Success),
        Command::PhaseSweep(a) => (commands::phase_sweep(a, out)?, Outcome::Success),
        Command::Sample(a) => (commands::sample(a, out)?, Outcome::Success),
        Command::FreeEnergy(a) => (commands::free_energy(a, out)?, Outcome::Success),
        Command::Verify(a) => verify::command(a, out)?,
        Command::Replay(_) => unreachable!("handled above"),
    };
    let manifest = RunManifest::new(command.clone(), command.seed(), start.elapsed(), outputs);
    manifest.write(out)?;
    Ok(outcome)
}
