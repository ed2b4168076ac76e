use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mmc", version, about = "Capacity of finite-field matrix channels with uniform-given-rank transfer matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Capacity and optimal input-rank distribution for a transfer-rank distribution.
    Capacity(CapacityArgs),
    /// Monte Carlo rank distribution of a layered relay network.
    Simulate(SimulateArgs),
    /// Rank distribution and capacity over a grid of erasure probabilities or depths.
    Sweep(SweepArgs),
    /// Brute-force checks on small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Re-run a command from its manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DimsArgs {
    #[arg(long)]
    pub q: u64,
    /// Packets sent per channel use.
    #[arg(long)]
    pub n: usize,
    /// Packets received per channel use.
    #[arg(long)]
    pub m: usize,
    /// Packet length in symbols.
    #[arg(long)]
    pub l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    /// q-ary symbols per channel use.
    Qary,
    Bits,
    /// Packets (of l symbols) per channel use.
    Packets,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Write the main output here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    /// silva | jafari | point <r> | file <path>
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "ARG"], required = true)]
    pub dist: Vec<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = Units::Qary)]
    pub units: Units,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetworkArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Relay layers (L).
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    /// Relays per layer (N).
    #[arg(long, default_value_t = 2)]
    pub relays: usize,
    /// Packets forwarded by each relay (M).
    #[arg(long, default_value_t = 2)]
    pub repetitions: usize,
    /// Erasure probability per packet and hop.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = mmc_core::netsim::DEFAULT_TRIALS)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Rank-distribution file to write.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVar {
    Eps,
    Layers,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[arg(long, value_enum)]
    pub vary: SweepVar,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Packet length for the capacity columns.
    #[arg(long, default_value_t = 8)]
    pub l: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// CSV file to write.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// Exact capacity of the explicit matrix channel against the rank optimizer.
    CapacityCompare(CompareArgs),
    /// Exhaustive check of the counting identities and the rank kernel.
    VerifyLemmas(LemmaArgs),
    /// Average a transfer distribution over GL x GL and check it becomes u.g.r.
    Randomize(RandomizeArgs),
    /// Two-relay network with erasures: true capacity against the u.g.r. bound.
    Example2(Example2Args),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub dims: DimsArgs,
    /// silva | jafari | point <r> | file <path>
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "ARG"], required = true)]
    pub dist: Vec<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: usize,
    /// Largest alphabet the oracle may enumerate.
    #[arg(long, default_value_t = mmc_core::oracle::DEFAULT_CAP)]
    pub cap: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LemmaArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long, default_value_t = 3)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RandomizeArgs {
    /// Start from the two-relay network law with this erasure probability (p/q).
    #[arg(long, conflicts_with = "matrix")]
    pub eps: Option<String>,
    /// Start from a point mass, rows separated by ';' and entries by ','.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = mmc_core::oracle::DEFAULT_GL_CAP)]
    pub gl_cap: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Example2Args {
    /// Erasure probability as an exact fraction, e.g. 1/4.
    #[arg(long)]
    pub eps: String,
    #[arg(long, default_value_t = 3)]
    pub l: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
