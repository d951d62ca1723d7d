//! Command-line runner for CVaR portfolio backtests.
//!
//! Subcommands mirror the library's workflow: `ingest` normalizes raw
//! panel files, `backtest` runs one strategy, `sweep` scores a
//! hyperparameter grid in-sample, `diff-study` compares the weight paths
//! of adjacent confidence levels, and `report` consolidates finished
//! runs into a comparison table plus cumulative return series.
//!
//! Every run writes a manifest beside its outputs recording the input
//! digest and the fully merged configuration. All outputs except the
//! manifest (which carries a timestamp) are byte-identical across
//! repeated runs on the same inputs.

mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rmcvar", version, about = "CVaR portfolio backtesting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a raw panel file into canonical CSV
    Ingest(IngestArgs),
    /// Run one strategy over a rolling window and write its artifacts
    Backtest(BacktestArgs),
    /// Score a window-length x penalty grid in-sample and pick the best
    Sweep(SweepArgs),
    /// Mean weight distance between adjacent confidence-level runs
    #[command(name = "diff-study")]
    DiffStudy(DiffStudyArgs),
    /// Consolidate finished backtest runs into comparison tables
    Report(ReportArgs),
}

/// Flags shared by every command that reads a return panel.
#[derive(Args)]
struct DataArgs {
    /// Input panel: a Ken-French-library export or a canonical CSV
    #[arg(long)]
    data: Option<PathBuf>,
    /// TOML file supplying any of the run flags; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Which panel section to read from raw exports: value or equal
    #[arg(long)]
    panel: Option<String>,
    /// First period to retain, YYYYMM
    #[arg(long)]
    start: Option<String>,
    /// Last period to retain, YYYYMM
    #[arg(long)]
    end: Option<String>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Directory for canonical.csv and manifest.json
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BacktestArgs {
    #[command(flatten)]
    data: DataArgs,
    /// equal-weight, min-cvar, avg-cvar, or rm-cvar
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated confidence levels, e.g. 0.95,0.96,0.97,0.98,0.99
    #[arg(long)]
    betas: Option<String>,
    /// Turnover penalty coefficient (rm-cvar only)
    #[arg(long)]
    lambda: Option<f64>,
    /// Rolling window length in periods
    #[arg(long)]
    window: Option<usize>,
    /// Last in-sample period, YYYYMM; trading starts the month after
    #[arg(long)]
    split: Option<String>,
    /// File of initial pre-trade weights, one decimal per line
    #[arg(long)]
    w_init: Option<PathBuf>,
    /// Periods per year for annualization
    #[arg(long)]
    periods_per_year: Option<u32>,
    /// Pre-trade weight drift: gross or net
    #[arg(long)]
    drift: Option<String>,
    /// Directory for weights.csv, returns.csv, metrics.json, manifest.json
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated confidence levels
    #[arg(long)]
    betas: Option<String>,
    /// Comma-separated window lengths to score
    #[arg(long)]
    windows: Option<String>,
    /// Comma-separated penalty values to score
    #[arg(long)]
    lambdas: Option<String>,
    /// Last in-sample period, YYYYMM
    #[arg(long)]
    split: Option<String>,
    /// File of initial pre-trade weights, one decimal per line
    #[arg(long)]
    w_init: Option<PathBuf>,
    #[arg(long)]
    periods_per_year: Option<u32>,
    #[arg(long)]
    drift: Option<String>,
    /// Worker threads for grid points; defaults to the machine's cores
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory for sweep.json and manifest.json
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiffStudyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated confidence levels, compared pairwise in order
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    /// Last in-sample period, YYYYMM
    #[arg(long)]
    split: Option<String>,
    /// Directory for diff.csv and manifest.json
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Backtest output directories to consolidate, in table order
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Directory for comparison.csv, cumulative.csv, manifest.json
    #[arg(long)]
    out_dir: PathBuf,
}

/// Failure with its process exit code. Usage errors exit 2, unreadable
/// or malformed data exits 3, solver failures exit 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Solver(_) => "solver",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<rmcvar::Error> for CliError {
    fn from(e: rmcvar::Error) -> Self {
        use rmcvar::Error::*;
        let msg = e.to_string();
        match e {
            SolverFailed { .. } => CliError::Solver(msg),
            MalformedProblem(_) | EmptyTail { .. } | NegativeLambda(_)
            | DimensionMismatch(_) | InvalidInput(_) => CliError::Usage(msg),
            _ => CliError::Data(msg),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Backtest(args) => commands::backtest(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::DiffStudy(args) => commands::diff_study(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            let json = serde_json::json!({
                "error": {
                    "kind": e.kind(),
                    "exit_code": e.exit_code(),
                    "message": e.message(),
                }
            });
            eprintln!("{json}");
            ExitCode::from(e.exit_code())
        }
    }
}
