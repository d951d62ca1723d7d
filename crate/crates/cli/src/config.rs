//! Run configuration merged from an optional TOML file and command-line
//! flags, flags winning field by field. The merged result is what runs
//! and what the manifest echoes; nothing falls back silently after the
//! merge.

use crate::CliError;
use rmcvar::backtest::metrics::DriftMode;
use rmcvar::cvar::PortfolioWeights;
use rmcvar::{BetaLevels, Panel, Period, Strategy};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Every field a run can take, all optional. A config file may set any
/// subset; flags override per field.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub strategy: Option<String>,
    pub betas: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub window: Option<usize>,
    pub windows: Option<Vec<usize>>,
    pub lambdas: Option<Vec<f64>>,
    pub split: Option<String>,
    pub w_init: Option<PathBuf>,
    pub panel: Option<String>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub periods_per_year: Option<u32>,
    pub drift: Option<String>,
    pub jobs: Option<usize>,
}

pub fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing {what}: pass the flag or set it in --config")))
}

pub fn parse_period(s: &str, what: &str) -> Result<Period, CliError> {
    s.parse()
        .map_err(|e| CliError::Usage(format!("bad {what} '{s}': {e}")))
}

pub fn parse_panel(s: Option<&str>) -> Result<Panel, CliError> {
    match s.unwrap_or("value") {
        "value" | "vw" => Ok(Panel::ValueWeighted),
        "equal" | "ew" => Ok(Panel::EqualWeighted),
        other => Err(CliError::Usage(format!(
            "bad panel '{other}': expected value or equal"
        ))),
    }
}

pub fn panel_name(panel: Panel) -> &'static str {
    match panel {
        Panel::ValueWeighted => "value-weighted",
        Panel::EqualWeighted => "equal-weighted",
    }
}

pub fn parse_drift(s: Option<&str>) -> Result<DriftMode, CliError> {
    match s.unwrap_or("gross") {
        "gross" => Ok(DriftMode::Gross),
        "net" => Ok(DriftMode::Net),
        other => Err(CliError::Usage(format!(
            "bad drift '{other}': expected gross or net"
        ))),
    }
}

pub fn drift_name(mode: DriftMode) -> &'static str {
    match mode {
        DriftMode::Gross => "gross",
        DriftMode::Net => "net",
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|c| c.trim())
        .filter(|c| !c.is_empty())
        .map(|c| {
            c.parse()
                .map_err(|e| CliError::Usage(format!("bad {what} entry '{c}': {e}")))
        })
        .collect()
}

/// Betas from the flag string, else the config file list, else the
/// standard five-level grid.
pub fn resolve_betas(
    flag: Option<&str>,
    file: Option<Vec<f64>>,
) -> Result<BetaLevels, CliError> {
    let values = match flag {
        Some(s) => parse_list(s, "beta")?,
        None => match file {
            Some(v) => v,
            None => return Ok(BetaLevels::default_grid()),
        },
    };
    BetaLevels::new(values).map_err(CliError::from)
}

/// The strategy grammar: `equal-weight`, `min-cvar` (exactly one beta),
/// `avg-cvar`, `rm-cvar` (requires a nonnegative lambda). A lambda given
/// to any other strategy is rejected rather than ignored.
pub fn resolve_strategy(
    name: &str,
    betas: &BetaLevels,
    lambda: Option<f64>,
) -> Result<Strategy, CliError> {
    let strategy = match name {
        "equal-weight" => Strategy::EqualWeight,
        "min-cvar" => {
            if betas.len() != 1 {
                return Err(CliError::Usage(format!(
                    "min-cvar takes exactly one beta level, got {}",
                    betas.len()
                )));
            }
            Strategy::MinCvar {
                beta: betas.as_slice()[0],
            }
        }
        "avg-cvar" => Strategy::AvgCvar {
            betas: betas.clone(),
        },
        "rm-cvar" => Strategy::RmCvar {
            betas: betas.clone(),
            lambda: require(lambda, "--lambda (rm-cvar)")?,
        },
        other => {
            return Err(CliError::Usage(format!(
                "unknown strategy '{other}': expected equal-weight, min-cvar, avg-cvar, or rm-cvar"
            )))
        }
    };
    if lambda.is_some() && !matches!(strategy, Strategy::RmCvar { .. }) {
        return Err(CliError::Usage(format!(
            "--lambda only applies to rm-cvar, not {name}"
        )));
    }
    Ok(strategy)
}

/// Initial pre-trade weights from a text file of decimals separated by
/// newlines or commas. Must form a long-only portfolio summing to one.
pub fn load_w_init(path: &Path) -> Result<PortfolioWeights, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read w_init {}: {e}", path.display())))?;
    let values: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|c| !c.is_empty())
        .map(|c| {
            c.parse::<f64>()
                .map_err(|_| CliError::Data(format!("bad w_init entry '{c}' in {}", path.display())))
        })
        .collect::<Result<_, _>>()?;
    PortfolioWeights::new(values).map_err(CliError::from)
}

/// The merged configuration echoed into every manifest. Optional fields
/// serialize as null when the run had no use for them.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub data: Option<PathBuf>,
    pub panel: Option<&'static str>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub strategy: Option<String>,
    pub betas: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    pub window: Option<usize>,
    pub windows: Option<Vec<usize>>,
    pub lambdas: Option<Vec<f64>>,
    pub split: Option<String>,
    pub w_init: Option<PathBuf>,
    pub periods_per_year: Option<u32>,
    pub drift: Option<&'static str>,
    pub jobs: Option<usize>,
}

impl ConfigEcho {
    pub fn new(data: Option<PathBuf>, panel: Option<Panel>) -> Self {
        ConfigEcho {
            data,
            panel: panel.map(panel_name),
            start: None,
            end: None,
            strategy: None,
            betas: None,
            lambda: None,
            window: None,
            windows: None,
            lambdas: None,
            split: None,
            w_init: None,
            periods_per_year: None,
            drift: None,
            jobs: None,
        }
    }
}
