//! Implementations of the five subcommands. Each loads its inputs, runs
//! the corresponding library call, writes its artifacts plus a manifest
//! into `--out-dir`, and prints a short summary to stdout.

use crate::config::{
    drift_name, load_file_config, load_w_init, parse_drift, parse_list, parse_panel,
    parse_period, pick, require, resolve_betas, resolve_strategy, ConfigEcho, FileConfig,
};
use crate::manifest::{stamp, write_output, Manifest};
use crate::{BacktestArgs, CliError, DataArgs, DiffStudyArgs, IngestArgs, ReportArgs, SweepArgs};
use rmcvar::backtest::metrics::{compute_metrics, portfolio_returns, weight_diff};
use rmcvar::data::{parse_ff_csv, read_canonical_csv, slice_period, write_canonical_csv};
use rmcvar::{
    run_backtest, sweep_hyperparameters, BacktestConfig, MetricsReport, Panel, Period,
    ReturnsMatrix, SolverOptions, Strategy, SweepEntry, SweepGrid, SweepSettings,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

struct LoadedPanel {
    matrix: ReturnsMatrix,
    path: PathBuf,
    panel: Panel,
    start: Option<String>,
    end: Option<String>,
}

/// Read `--data`, which is either a canonical CSV (sniffed by its header)
/// or a raw library export read through `--panel`, then cut it to the
/// requested period range.
fn load_panel(args: &DataArgs, file: &FileConfig) -> Result<LoadedPanel, CliError> {
    let path = require(pick(args.data.clone(), file.data.clone()), "--data")?;
    let panel = parse_panel(pick(args.panel.as_deref(), file.panel.as_deref()))?;
    let start = pick(args.start.clone(), file.start.clone());
    let end = pick(args.end.clone(), file.end.clone());

    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let full = if text.lines().next().is_some_and(|l| l.starts_with("period,")) {
        read_canonical_csv(&text)?
    } else {
        parse_ff_csv(&text, panel, None)?
    };
    let s = match &start {
        Some(x) => parse_period(x, "--start")?,
        None => full.first_period(),
    };
    let e = match &end {
        Some(x) => parse_period(x, "--end")?,
        None => full.last_period(),
    };
    let matrix = slice_period(&full, s, e)?;
    Ok(LoadedPanel {
        matrix,
        path,
        panel,
        start,
        end,
    })
}

fn echo_panel(loaded: &LoadedPanel) -> ConfigEcho {
    let mut echo = ConfigEcho::new(Some(loaded.path.clone()), Some(loaded.panel));
    echo.start = loaded.start.clone();
    echo.end = loaded.end.clone();
    echo
}

pub fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let file = load_file_config(args.data.config.as_deref())?;
    let loaded = load_panel(&args.data, &file)?;

    let out = write_output(
        &args.out_dir,
        "canonical.csv",
        &write_canonical_csv(&loaded.matrix),
    )?;
    let mut manifest = Manifest::new("ingest", echo_panel(&loaded));
    manifest.data = Some(stamp(&loaded.path)?);
    manifest.outputs.push(stamp(&out)?);
    manifest.write(&args.out_dir)?;

    println!(
        "canonical.csv: {} assets x {} periods ({}..{})",
        loaded.matrix.n_assets(),
        loaded.matrix.n_periods(),
        loaded.matrix.first_period(),
        loaded.matrix.last_period(),
    );
    Ok(())
}

/// The metrics.json layout shared by `backtest` (writer) and `report`
/// (reader).
#[derive(Serialize, Deserialize)]
struct MetricsFile {
    strategy: String,
    periods_per_year: u32,
    drift: String,
    metrics: MetricsBlock,
}

#[derive(Serialize, Deserialize)]
struct MetricsBlock {
    ar: f64,
    risk: f64,
    rr: f64,
    maxdd: f64,
    to: f64,
}

impl From<MetricsReport> for MetricsBlock {
    fn from(r: MetricsReport) -> Self {
        MetricsBlock {
            ar: r.ar,
            risk: r.risk,
            rr: r.rr,
            maxdd: r.maxdd,
            to: r.to,
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

pub fn backtest(args: BacktestArgs) -> Result<(), CliError> {
    let file = load_file_config(args.data.config.as_deref())?;
    let loaded = load_panel(&args.data, &file)?;

    let betas = resolve_betas(args.betas.as_deref(), file.betas.clone())?;
    let name = require(pick(args.strategy.clone(), file.strategy.clone()), "--strategy")?;
    let lambda = pick(args.lambda, file.lambda);
    let strategy = resolve_strategy(&name, &betas, lambda)?;
    let window = pick(args.window, file.window).unwrap_or(120);
    let split = require(pick(args.split.clone(), file.split.clone()), "--split")?;
    let w_init_path = pick(args.w_init.clone(), file.w_init.clone());
    let w_init = w_init_path.as_deref().map(load_w_init).transpose()?;
    let ppy = pick(args.periods_per_year, file.periods_per_year).unwrap_or(12);
    let drift = parse_drift(pick(args.drift.as_deref(), file.drift.as_deref()))?;

    let config = BacktestConfig {
        window_len: window,
        strategy: strategy.clone(),
        in_sample_end: parse_period(&split, "--split")?,
        w_init,
        solver: SolverOptions::default(),
    };
    let path = run_backtest(&loaded.matrix, &config)?;
    let series = portfolio_returns(&path, &loaded.matrix)?;
    let report = compute_metrics(&path, &loaded.matrix, ppy, drift)?;

    let weights_out = write_output(&args.out_dir, "weights.csv", &path.to_csv())?;
    let returns_out = write_output(&args.out_dir, "returns.csv", &series.to_csv())?;
    let metrics = MetricsFile {
        strategy: strategy.label(),
        periods_per_year: ppy,
        drift: drift_name(drift).to_string(),
        metrics: report.into(),
    };
    let metrics_out = write_output(&args.out_dir, "metrics.json", &to_json(&metrics))?;

    let mut echo = echo_panel(&loaded);
    echo.strategy = Some(name);
    echo.betas = match &strategy {
        Strategy::EqualWeight => None,
        _ => Some(betas.as_slice().to_vec()),
    };
    echo.lambda = lambda;
    echo.window = Some(window);
    echo.split = Some(split);
    echo.w_init = w_init_path.clone();
    echo.periods_per_year = Some(ppy);
    echo.drift = Some(drift_name(drift));
    let mut manifest = Manifest::new("backtest", echo);
    manifest.data = Some(stamp(&loaded.path)?);
    manifest.w_init = w_init_path.as_deref().map(stamp).transpose()?;
    manifest.outputs.push(stamp(&weights_out)?);
    manifest.outputs.push(stamp(&returns_out)?);
    manifest.outputs.push(stamp(&metrics_out)?);
    manifest.write(&args.out_dir)?;

    println!(
        "{}: ar={:+.4} risk={:.4} rr={:+.4} maxdd={:+.4} to={:.4}",
        strategy.label(),
        report.ar,
        report.risk,
        report.rr,
        report.maxdd,
        report.to,
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepFile<'a> {
    entries: &'a [SweepEntry],
    best_index: usize,
    selected: SelectedPoint,
}

#[derive(Serialize)]
struct SelectedPoint {
    window: usize,
    lambda: f64,
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let file = load_file_config(args.data.config.as_deref())?;
    let loaded = load_panel(&args.data, &file)?;

    let betas = resolve_betas(args.betas.as_deref(), file.betas.clone())?;
    let windows = match args.windows.as_deref() {
        Some(s) => parse_list(s, "window")?,
        None => file.windows.clone().unwrap_or_else(|| vec![120]),
    };
    let lambdas = match args.lambdas.as_deref() {
        Some(s) => parse_list(s, "lambda")?,
        None => file
            .lambdas
            .clone()
            .unwrap_or_else(|| vec![0.001, 0.005, 0.01, 0.05]),
    };
    let split = require(pick(args.split.clone(), file.split.clone()), "--split")?;
    let w_init_path = pick(args.w_init.clone(), file.w_init.clone());
    let w_init = w_init_path.as_deref().map(load_w_init).transpose()?;
    let ppy = pick(args.periods_per_year, file.periods_per_year).unwrap_or(12);
    let drift = parse_drift(pick(args.drift.as_deref(), file.drift.as_deref()))?;
    let jobs = pick(args.jobs, file.jobs);

    let grid = SweepGrid {
        window_lens: windows.clone(),
        lambdas: lambdas.clone(),
    };
    let settings = SweepSettings {
        in_sample_end: parse_period(&split, "--split")?,
        w_init,
        solver: SolverOptions::default(),
        periods_per_year: ppy,
        drift,
    };
    let outcome = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build a pool of {n} jobs: {e}")))?
            .install(|| sweep_hyperparameters(&loaded.matrix, &betas, &grid, &settings))?,
        None => sweep_hyperparameters(&loaded.matrix, &betas, &grid, &settings)?,
    };

    let best = outcome.best();
    let sweep_out = write_output(
        &args.out_dir,
        "sweep.json",
        &to_json(&SweepFile {
            entries: &outcome.entries,
            best_index: outcome.best_index,
            selected: SelectedPoint {
                window: best.window_len,
                lambda: best.lambda,
            },
        }),
    )?;

    let mut echo = echo_panel(&loaded);
    echo.betas = Some(betas.as_slice().to_vec());
    echo.windows = Some(windows);
    echo.lambdas = Some(lambdas);
    echo.split = Some(split);
    echo.w_init = w_init_path.clone();
    echo.periods_per_year = Some(ppy);
    echo.drift = Some(drift_name(drift));
    echo.jobs = jobs;
    let mut manifest = Manifest::new("sweep", echo);
    manifest.data = Some(stamp(&loaded.path)?);
    manifest.w_init = w_init_path.as_deref().map(stamp).transpose()?;
    manifest.outputs.push(stamp(&sweep_out)?);
    manifest.write(&args.out_dir)?;

    println!(
        "selected window={} lambda={} (in-sample rr={:+.4} over {} grid points)",
        best.window_len,
        best.lambda,
        best.report.rr,
        outcome.entries.len(),
    );
    Ok(())
}

pub fn diff_study(args: DiffStudyArgs) -> Result<(), CliError> {
    let file = load_file_config(args.data.config.as_deref())?;
    let loaded = load_panel(&args.data, &file)?;

    let betas = resolve_betas(args.betas.as_deref(), file.betas.clone())?;
    let window = pick(args.window, file.window).unwrap_or(120);
    let split = require(pick(args.split.clone(), file.split.clone()), "--split")?;
    let in_sample_end = parse_period(&split, "--split")?;

    let mut csv = String::from("pair,diff\n");
    if betas.len() < 2 {
        eprintln!(
            "warning: diff study needs at least two beta levels, got {}; no pairs to compare",
            betas.len()
        );
    } else {
        let paths: Vec<_> = betas
            .as_slice()
            .iter()
            .map(|&beta| {
                run_backtest(
                    &loaded.matrix,
                    &BacktestConfig {
                        window_len: window,
                        strategy: Strategy::MinCvar { beta },
                        in_sample_end,
                        w_init: None,
                        solver: SolverOptions::default(),
                    },
                )
            })
            .collect::<Result<_, _>>()?;
        let mut total = 0.0;
        for k in 0..paths.len() - 1 {
            let d = weight_diff(&paths[k], &paths[k + 1])?;
            total += d;
            let pair = format!("{}/{}", betas.as_slice()[k], betas.as_slice()[k + 1]);
            csv.push_str(&format!("{pair},{d}\n"));
            println!("{pair}: {:.2}%", 100.0 * d);
        }
        let average = total / (paths.len() - 1) as f64;
        csv.push_str(&format!("average,{average}\n"));
        println!("average: {:.2}%", 100.0 * average);
    }
    let diff_out = write_output(&args.out_dir, "diff.csv", &csv)?;

    let mut echo = echo_panel(&loaded);
    echo.betas = Some(betas.as_slice().to_vec());
    echo.window = Some(window);
    echo.split = Some(split);
    let mut manifest = Manifest::new("diff-study", echo);
    manifest.data = Some(stamp(&loaded.path)?);
    manifest.outputs.push(stamp(&diff_out)?);
    manifest.write(&args.out_dir)?;
    Ok(())
}

/// Quote a CSV field if it holds a comma or quote.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

struct RunArtifacts {
    metrics: MetricsFile,
    periods: Vec<Period>,
    returns: Vec<f64>,
}

fn load_run(dir: &std::path::Path) -> Result<RunArtifacts, CliError> {
    let metrics_path = dir.join("metrics.json");
    let text = std::fs::read_to_string(&metrics_path).map_err(|e| {
        CliError::Data(format!("cannot read {}: {e}", metrics_path.display()))
    })?;
    let metrics: MetricsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("bad {}: {e}", metrics_path.display())))?;

    let returns_path = dir.join("returns.csv");
    let text = std::fs::read_to_string(&returns_path).map_err(|e| {
        CliError::Data(format!("cannot read {}: {e}", returns_path.display()))
    })?;
    let mut lines = text.lines();
    if lines.next() != Some("period,return") {
        return Err(CliError::Data(format!(
            "{} is not a returns series",
            returns_path.display()
        )));
    }
    let mut periods = Vec::new();
    let mut returns = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (p, v) = line.split_once(',').ok_or_else(|| {
            CliError::Data(format!("bad row '{line}' in {}", returns_path.display()))
        })?;
        periods.push(parse_period(p, "returns row").map_err(|e| match e {
            CliError::Usage(m) => CliError::Data(m),
            other => other,
        })?);
        returns.push(v.parse::<f64>().map_err(|_| {
            CliError::Data(format!("bad value '{v}' in {}", returns_path.display()))
        })?);
    }
    Ok(RunArtifacts {
        metrics,
        periods,
        returns,
    })
}

pub fn report(args: ReportArgs) -> Result<(), CliError> {
    let runs: Vec<RunArtifacts> = args
        .runs
        .iter()
        .map(|dir| load_run(dir))
        .collect::<Result<_, _>>()?;

    for pair in runs.windows(2) {
        if pair[0].periods != pair[1].periods {
            return Err(CliError::Data(
                "runs cover different periods and cannot share a cumulative table".into(),
            ));
        }
    }

    let mut comparison = String::from("strategy,ar,risk,rr,maxdd,to\n");
    for run in &runs {
        let m = &run.metrics.metrics;
        comparison.push_str(&format!(
            "{},{},{},{:.2},{},{}\n",
            csv_field(&run.metrics.strategy),
            pct(m.ar),
            pct(m.risk),
            m.rr,
            pct(m.maxdd),
            pct(m.to),
        ));
    }
    print!("{comparison}");

    let mut cumulative = String::from("period");
    for run in &runs {
        cumulative.push(',');
        cumulative.push_str(&csv_field(&run.metrics.strategy));
    }
    cumulative.push('\n');
    let mut acc = vec![1.0; runs.len()];
    for (t, period) in runs[0].periods.iter().enumerate() {
        cumulative.push_str(&period.to_string());
        for (j, run) in runs.iter().enumerate() {
            acc[j] *= 1.0 + run.returns[t];
            cumulative.push(',');
            cumulative.push_str(&(acc[j] - 1.0).to_string());
        }
        cumulative.push('\n');
    }

    let comparison_out = write_output(&args.out_dir, "comparison.csv", &comparison)?;
    let cumulative_out = write_output(&args.out_dir, "cumulative.csv", &cumulative)?;

    let mut manifest = Manifest::new("report", ConfigEcho::new(None, None));
    for dir in &args.runs {
        manifest.inputs.push(stamp(&dir.join("metrics.json"))?);
        manifest.inputs.push(stamp(&dir.join("returns.csv"))?);
    }
    manifest.outputs.push(stamp(&comparison_out)?);
    manifest.outputs.push(stamp(&cumulative_out)?);
    manifest.write(&args.out_dir)?;
    Ok(())
}
