//! The `tensor-te` command line: lattice and triad simulation, pairwise and
//! triad analysis of CSV files, coupling sweeps, and channel capacity.

pub mod analyze;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tensor_te::estimation::Objective;
use tensor_te::significance::SurrogateMethod;
use tensor_te::simulate::{Boundary, TriadStructure};

pub use error::{CliError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TENSOR_TE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tensor-te", version, about = "Transfer entropy and causal structure from quantized time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a coupled Ulam lattice or a ground-truth triad to CSV.
    Simulate(SimulateArgs),
    /// Measure every directed relation between CSV columns; classify triads.
    Analyze(AnalyzeArgs),
    /// Capacity bound between neighbouring lattice maps over a coupling grid.
    Sweep(SweepArgs),
    /// Capacity of a channel matrix given as one stochastic row per line.
    Capacity(CapacityArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    FreeFirstMap,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::FreeFirstMap => Boundary::FreeFirstMap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TriadArg {
    Chain,
    Fork,
    VStructure,
}

impl From<TriadArg> for TriadStructure {
    fn from(t: TriadArg) -> Self {
        match t {
            TriadArg::Chain => TriadStructure::Chain,
            TriadArg::Fork => TriadStructure::Fork,
            TriadArg::VStructure => TriadStructure::VStructure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Te,
    Capacity,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Te => Objective::TransferEntropy,
            ObjectiveArg::Capacity => Objective::CapacityBound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    CircularShift,
    BlockPermutation,
}

impl From<MethodArg> for SurrogateMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::CircularShift => SurrogateMethod::CircularShift,
            MethodArg::BlockPermutation => SurrogateMethod::BlockPermutation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// Integer columns are symbols, anything else is quantized.
    Auto,
    /// Real values, quantized by the extremum scheme.
    Real,
    /// Pre-quantized nonnegative integer symbols.
    Symbols,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of lattice maps.
    #[arg(long, default_value_t = 2)]
    pub maps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Samples kept after the transient.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub transient: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::FreeFirstMap)]
    pub boundary: BoundaryArg,
    /// Simulate a binary triad instead of a lattice; writes a
    /// `<output stem>.truth.json` sidecar.
    #[arg(long, value_enum)]
    pub triad: Option<TriadArg>,
    /// Crossover probability of the triad channels.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Triad edge delays, e.g. `1,2`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub delays: Option<Vec<usize>>,
    /// Output CSV; stdout if omitted (lattice only).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    #[arg(long, default_value_t = 199)]
    pub surrogates: usize,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::CircularShift)]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Destination past length.
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Source vector length.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub tau_min: usize,
    #[arg(long, default_value_t = 20)]
    pub tau_max: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Capacity)]
    pub objective: ObjectiveArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Columns to analyze, by header name; all columns if omitted.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = InputKind::Auto)]
    pub input_kind: InputKind,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    pub surrogate: SurrogateArgs,
    /// Allowed deviation of the folded channel from a noiseless one.
    #[arg(long, default_value_t = 0.02)]
    pub noiseless_tol: f64,
    /// Bits of slack in the data processing inequality check.
    #[arg(long, default_value_t = 0.01)]
    pub dpi_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub delay_slack: i64,
    #[arg(long, default_value_t = 1e-9)]
    pub capacity_tol: f64,
    /// Output JSON; stdout if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Coupling grid as `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0:1:0.02")]
    pub epsilon: String,
    #[arg(long, default_value_t = 10)]
    pub maps: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub transient: usize,
    /// Lattice seed.
    #[arg(long = "lattice-seed", default_value_t = 1)]
    pub lattice_seed: u64,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    pub surrogate: SurrogateArgs,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Matrix file: one row per line, entries separated by commas or spaces.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Print JSON instead of `key: value` lines.
    #[arg(long)]
    pub json: bool,
}

/// Cap the global worker pool from the environment, once.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a second call in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Capacity(a) => commands::capacity(&a),
    }
}
