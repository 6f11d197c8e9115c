//! `spreadlab` command-line front end.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "spreadlab", version, about = "Order book spread simulation and spread-parity analysis")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Config file of `key = value` lines under `[section]` headers.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for all randomness of the invocation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the order book simulation.
    Simulate(SimulateArgs),
    /// Odd-spread fraction after one parity transition, over virtual stocks.
    ParitySweep(SweepArgs),
    /// Run estimators on an event CSV.
    Analyze(AnalyzeArgs),
    /// Convert a best-quote tape into a classified event CSV.
    Ingest(IngestArgs),
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    #[arg(long)]
    pub pi: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// `uniform` or `nonuniform`.
    #[arg(long)]
    pub mechanism: Option<String>,
    /// Adjacent-quote probability for the nonuniform mechanism.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub cancel_rate: Option<f64>,
    /// Recorded steps after warm-up.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub initial_depth: Option<usize>,
    /// Divergence ceiling on the spread, in ticks.
    #[arg(long)]
    pub ceiling: Option<u64>,
    /// Independent replicas, run on consecutive streams of the seed.
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Also write the best-quote tape of each replica.
    #[arg(long)]
    pub quote_tape: bool,
    /// Tick size used for the quote tape.
    #[arg(long)]
    pub tick_size: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// Comma-separated mean spreads.
    #[arg(long, value_delimiter = ',')]
    pub means: Option<Vec<f64>>,
    /// Comma-separated mechanisms: `uniform`, `nonuniform`.
    #[arg(long, value_delimiter = ',')]
    pub mechanisms: Option<Vec<String>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Spreads drawn per virtual stock.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Spread marginal: `geometric` or `poisson`.
    #[arg(long)]
    pub law: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct AnalyzeArgs {
    /// Event CSV with columns t,s_pre,s_post,kind and optionally mid.
    #[arg(long)]
    pub input: Option<String>,
    /// Run every estimator.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub odd_fraction: bool,
    #[arg(long)]
    pub conditional_parity: bool,
    #[arg(long)]
    pub delta_s: bool,
    #[arg(long)]
    pub alpha_estimate: bool,
    #[arg(long)]
    pub acf: bool,
    #[arg(long)]
    pub relaxation: bool,
    /// Cells with fewer events are flagged low-statistics.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Pre-event spreads for the Δs histogram; all observed when omitted.
    #[arg(long, value_delimiter = ',')]
    pub delta_s_spreads: Option<Vec<u32>>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub fit_first: Option<usize>,
    #[arg(long)]
    pub fit_last: Option<usize>,
    /// Spread jump Δ conditioning the relaxation curve.
    #[arg(long, allow_hyphen_values = true)]
    pub relax_delta: Option<i64>,
    #[arg(long)]
    pub relax_max_lag: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct IngestArgs {
    /// Quote CSV with columns timestamp,bid,ask and optionally day.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub tick_size: Option<f64>,
    /// Largest accepted distance of a price from the tick grid.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Skip malformed and off-grid rows instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Add a `mid` column (half ticks) to the event file.
    #[arg(long)]
    pub with_mid: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
