use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "skwire", version, about = "Feedback secret-key protocol over a thermal wiretap channel")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs (default: one per core).
    #[arg(long, global = true, env = "SKWIRE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form rates for a channel.
    Rates(RatesArgs),
    /// Analytic error bounds and the leakage budget.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo experiment and check it against the analytic predictions.
    Simulate(SimulateArgs),
    /// Run one experiment per point of a swept parameter.
    Sweep(SweepArgs),
    /// Run the built-in acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// An experiment config file and/or inline parameters. Flags override file fields.
#[derive(Debug, Args)]
pub struct ParamFlags {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Transmissivity (thermal channels).
    #[arg(long)]
    pub eta: Option<f64>,
    /// Thermal photon number (thermal channels; default 0 without a config).
    #[arg(long)]
    pub n_th: Option<f64>,
    /// Mean photon number per mode.
    #[arg(long)]
    pub n_s: Option<f64>,
    /// Feedback rounds.
    #[arg(long)]
    pub n: Option<u32>,
    /// Nominal rate in bits per round.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Variance of Eve's tap noise (default 1 without a config).
    #[arg(long)]
    pub tap_variance: Option<f64>,
    /// Root seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Fail instead of omitting the squeezed-state rate when it is undefined.
    #[arg(long)]
    pub squeezed: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamFlags,
    /// Directory for report.json and transcripts.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write every trial's transcript.
    #[arg(long)]
    pub dump_transcripts: bool,
    /// Format of the verdict printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config (JSON with `base` and `sweep`).
    #[arg(long)]
    pub config: PathBuf,
    /// Root seed, overriding the base config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Root seed for the Monte Carlo criteria.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale the schedule's variance contraction by 1 + EPS (mutation check).
    #[arg(long, hide = true, value_name = "EPS")]
    pub perturb_schedule: Option<f64>,
}
