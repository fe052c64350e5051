use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::InputFormat;

#[derive(Debug, Parser)]
#[command(name = "shadowtail", version, about = "Shadow moments, VaR and ES for heavy tails with a remote upper bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the dual tail and write a JSON risk report.
    Fit(FitArgs),
    /// Re-evaluate risk measures of an existing report.
    Report(ReportArgs),
    /// Truncated, absorbing-barrier and shadow means as CSV.
    Compare(CompareArgs),
    /// Draw from a shadow model or run the apparent-tail experiment.
    Simulate(SimulateArgs),
    /// Mean-excess and survival-curve data as CSV.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV or JSONL file of observations
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the file extension (.jsonl/.ndjson vs anything else).
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    /// Zero-based CSV column holding the observations.
    #[arg(long, default_value_t = 0)]
    pub column: usize,
    /// Key to read when JSONL records are objects.
    #[arg(long)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Lower end L of the support
    #[arg(long, allow_negative_numbers = true)]
    pub lower_bound: f64,
    /// Upper bound H; every observation must lie below it
    #[arg(long)]
    pub upper_bound: f64,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct ThresholdArgs {
    /// Tail threshold in data units.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Tail threshold as a sample quantile (default 0.95).
    #[arg(long)]
    pub threshold_quantile: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    /// VaR levels, comma-separated [default: 0.95,0.99]
    #[arg(long, value_delimiter = ',')]
    pub var_levels: Option<Vec<f64>>,
    /// Expected-shortfall levels, comma-separated [default: 0.95,0.99]
    #[arg(long, value_delimiter = ',')]
    pub es_levels: Option<Vec<f64>>,
    /// Upper bounds at which to recompute the shadow mean.
    #[arg(long, value_delimiter = ',')]
    pub h_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Bootstrap replicates for a confidence interval on the shadow mean.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Confidence level of the bootstrap interval
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Seed for the bootstrap
    #[arg(long, env = "SHADOW_SEED")]
    pub seed: Option<u64>,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A report written by `fit`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "upper", required = true, multiple = true, args = ["upper_bound", "h_curve"])]
pub struct CompareArgs {
    /// Tail index alpha of the dual GPD
    #[arg(long)]
    pub alpha: f64,
    /// Scale sigma of the dual GPD
    #[arg(long)]
    pub sigma: f64,
    /// Lower end L of the support
    #[arg(long, allow_negative_numbers = true)]
    pub lower_bound: f64,
    #[arg(long)]
    pub upper_bound: Option<f64>,
    /// Threshold for the shadow mean; defaults to the lower bound.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Sweep of upper bounds, one CSV row each.
    #[arg(long, value_delimiter = ',')]
    pub h_curve: Option<Vec<f64>>,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    ApparentTail,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Tail index alpha of the dual GPD
    #[arg(long)]
    pub alpha: f64,
    /// Scale sigma of the dual GPD
    #[arg(long)]
    pub sigma: f64,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Model threshold; defaults to the lower bound.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Number of draws
    #[arg(long)]
    pub n: usize,
    /// Seed for the draws
    #[arg(long, env = "SHADOW_SEED")]
    pub seed: Option<u64>,
    /// Drop draws above this value.
    #[arg(long)]
    pub censor_at: Option<f64>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Write here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}
