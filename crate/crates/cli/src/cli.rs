use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::manifest::TopologyKind;

#[derive(Debug, Parser)]
#[command(
    name = "cdadt",
    version,
    about = "Decentralized CCA experiments with constraint dissolving and double tracking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic views A and B as CSV.
    GenData(GenDataArgs),
    /// Run the decentralized solver once.
    Run(RunArgs),
    /// Run once per penalty parameter and summarize.
    SweepBeta(SweepArgs),
    /// Summarize finished runs found under a directory.
    Report(ReportArgs),
    /// Print the centralized optimum of an instance.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub m: usize,
    #[arg(long, default_value_t = 3200)]
    pub q: usize,
    #[arg(long = "xi-a", default_value_t = 0.97)]
    pub xi_a: f64,
    #[arg(long = "xi-b", default_value_t = 0.96)]
    pub xi_b: f64,
    /// Seeds the data (A uses SEED, B uses SEED+1), the ER graph and the starting point.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    /// CSV with one row per feature of view A; requires --data-b.
    #[arg(long = "data-a", requires = "data_b")]
    pub data_a: Option<PathBuf>,
    #[arg(long = "data-b", requires = "data_a")]
    pub data_b: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    #[arg(long, value_enum, default_value_t = TopologyKind::Er)]
    pub topology: TopologyKind,
    #[arg(long = "p-edge", default_value_t = 0.5)]
    pub p_edge: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    pub max_iters: usize,
    /// Stopping tolerance shared by all three metrics.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Weight of the tracker deviations in the logged merit.
    #[arg(long, default_value_t = 1e-2)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Rerun a saved manifest; all problem and solver flags are ignored.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 1.0, 10.0, 100.0])]
    pub betas: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory searched recursively for runs (a `manifest.json` next to a `log.csv`).
    pub dir: PathBuf,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
}
