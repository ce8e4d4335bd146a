use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Continuous-time quantum walks with decoherence"
)]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial state and write node probabilities over time.
    Run(RunArgs),
    /// Report the Laplacian spectrum and the first-order super-operator spectrum.
    EigReport(EigReportArgs),
    /// Time perturbative assembly against dense diagonalization.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Perturb,
    Exact,
    Pure,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct InitArgs {
    /// Start localized on this node (default 0).
    #[arg(long)]
    pub start_node: Option<usize>,
    /// One `re [im]` line per node: amplitudes, or probabilities for the classical walk.
    #[arg(long)]
    pub init_file: Option<PathBuf>,
    /// Start from the uniform state (maximally mixed, or the uniform superposition for `pure`).
    #[arg(long)]
    pub uniform: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Edge-list file: vertex count on the first line, then one `u v` pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Perturb)]
    pub method: MethodArg,
    /// Decoherence rate.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_stop: f64,
    /// Number of intervals; the grid has `t-steps + 1` points.
    #[arg(long, default_value_t = 100)]
    pub t_steps: usize,
    #[command(flatten)]
    pub init: InitArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for the mixing tensor.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Recorded in the metadata; runs on a given graph file are deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gap-collision tolerance; defaults to 1e-9·(λ_max + 1).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EigReportArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
    /// Include the nonzero entries of the mixing tensor.
    #[arg(long)]
    pub mixing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 12, 16])]
    pub sizes: Vec<usize>,
    /// `path`, `random-tree`, `erdos-renyi` or `erdos-renyi:<q>`.
    #[arg(long, default_value = "erdos-renyi")]
    pub family: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Largest size timed at all.
    #[arg(long, default_value_t = qwalk_bench::DEFAULT_PERTURB_MAX_N)]
    pub max_n: usize,
    /// Largest size for which the dense oracle is timed.
    #[arg(long, default_value_t = qwalk_bench::DEFAULT_ORACLE_MAX_N)]
    pub oracle_max_n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
