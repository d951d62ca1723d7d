//! Rolling-window backtests. Each scored period gets weights solved on the
//! `Q` periods immediately before it, then the window slides one month.
//! The output carries one extra row: the recommendation for the period
//! after the data ends.

pub mod metrics;

use crate::cvar::{
    average_cvar_portfolio, compute_c_refs, solve_min_cvar, solve_rm_cvar, tail_mass, BetaLevels,
    PortfolioWeights,
};
use crate::data::{slice_period, Period, ReturnsMatrix};
use crate::error::{Error, Result};
use crate::lp::SolverOptions;
use metrics::{compute_metrics, DriftMode, MetricsReport};
use rayon::prelude::*;
use serde::Serialize;

/// What to solve on each window.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    EqualWeight,
    MinCvar { beta: f64 },
    AvgCvar { betas: BetaLevels },
    RmCvar { betas: BetaLevels, lambda: f64 },
}

impl Strategy {
    /// Name used in reports and file headers.
    pub fn label(&self) -> String {
        match self {
            Strategy::EqualWeight => "equal-weight".into(),
            Strategy::MinCvar { beta } => format!("min-cvar@{beta}"),
            Strategy::AvgCvar { betas } => format!("avg-cvar@{:?}", betas.as_slice()),
            Strategy::RmCvar { betas, lambda } => {
                format!("rm-cvar@{:?},lambda={lambda}", betas.as_slice())
            }
        }
    }
}

/// Backtest run parameters. `in_sample_end` is the last period reserved
/// for history; trading starts the month after.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub window_len: usize,
    pub strategy: Strategy,
    pub in_sample_end: Period,
    /// Previous-weights anchor for the first RM window. Equal weights
    /// when absent.
    pub w_init: Option<PortfolioWeights>,
    pub solver: SolverOptions,
}

impl BacktestConfig {
    fn validate(&self, returns: &ReturnsMatrix) -> Result<()> {
        if self.window_len < 2 {
            return Err(Error::TooFewPeriods {
                what: "backtest window",
                got: self.window_len,
                need: 2,
            });
        }
        if returns.index_of(self.in_sample_end).is_none() {
            return Err(Error::OutOfRange {
                requested: self.in_sample_end,
                first: returns.first_period(),
                last: returns.last_period(),
            });
        }
        if let Some(w) = &self.w_init {
            if w.len() != returns.n_assets() {
                return Err(Error::DimensionMismatch(format!(
                    "w_init has {} entries for {} assets",
                    w.len(),
                    returns.n_assets()
                )));
            }
        }
        match &self.strategy {
            Strategy::EqualWeight => {}
            Strategy::MinCvar { beta } => {
                tail_mass(self.window_len, *beta)?;
            }
            Strategy::AvgCvar { betas } => {
                for &b in betas.as_slice() {
                    tail_mass(self.window_len, b)?;
                }
            }
            Strategy::RmCvar { betas, lambda } => {
                if !lambda.is_finite() || *lambda < 0.0 {
                    return Err(Error::NegativeLambda(*lambda));
                }
                for &b in betas.as_slice() {
                    tail_mass(self.window_len, b)?;
                }
            }
        }
        Ok(())
    }

    fn w_init_or_equal(&self, n: usize) -> PortfolioWeights {
        self.w_init
            .clone()
            .unwrap_or_else(|| PortfolioWeights::equal(n))
    }
}

/// Sequence of portfolio rows, one per traded period plus the final
/// recommendation row. Row `t` is the portfolio held through period
/// `periods[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsPath {
    asset_names: Vec<String>,
    periods: Vec<Period>,
    rows: Vec<f64>,
}

impl WeightsPath {
    /// Validating constructor for externally assembled paths. Periods must
    /// be consecutive months and every row a valid long-only portfolio.
    pub fn new(asset_names: Vec<String>, periods: Vec<Period>, rows: Vec<f64>) -> Result<Self> {
        let n = asset_names.len();
        if n == 0 || periods.is_empty() {
            return Err(Error::InvalidInput(
                "weight path needs at least one asset and one row".into(),
            ));
        }
        if rows.len() != n * periods.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} rows of {} assets",
                rows.len(),
                periods.len(),
                n
            )));
        }
        if periods.windows(2).any(|p| p[1] != p[0].succ()) {
            return Err(Error::InvalidInput(
                "weight rows must cover consecutive months".into(),
            ));
        }
        for (t, row) in rows.chunks(n).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > crate::cvar::WEIGHT_SUM_TOL
                || row.iter().any(|&w| w < -crate::cvar::WEIGHT_SNAP || !w.is_finite())
            {
                return Err(Error::InvalidInput(format!(
                    "row {t} is not a long-only portfolio (sum {sum})"
                )));
            }
        }
        Ok(WeightsPath {
            asset_names,
            periods,
            rows,
        })
    }

    fn from_rows(
        asset_names: Vec<String>,
        first: Period,
        rows: Vec<PortfolioWeights>,
    ) -> WeightsPath {
        let n = asset_names.len();
        let mut periods = Vec::with_capacity(rows.len());
        let mut p = first;
        let mut flat = Vec::with_capacity(rows.len() * n);
        for w in &rows {
            periods.push(p);
            p = p.succ();
            flat.extend_from_slice(w.as_slice());
        }
        WeightsPath {
            asset_names,
            periods,
            rows: flat,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.periods.len()
    }

    pub fn n_assets(&self) -> usize {
        self.asset_names.len()
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn period(&self, t: usize) -> Period {
        self.periods[t]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.n_assets();
        &self.rows[t * n..(t + 1) * n]
    }

    /// CSV with a `period` column followed by one column per asset.
    /// Values print in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period");
        for name in &self.asset_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for t in 0..self.n_rows() {
            out.push_str(&self.periods[t].to_string());
            for w in self.row(t) {
                out.push(',');
                out.push_str(&w.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn tag_window(e: Error, label: Period) -> Error {
    match e {
        Error::SolverFailed { status, context } => Error::SolverFailed {
            status,
            context: format!("{context} (window for {label})"),
        },
        other => other,
    }
}

/// Label of the row solved at window end index `t`: the period about to be
/// traded, or the month after the data for the final recommendation row.
fn row_label(returns: &ReturnsMatrix, t: usize) -> Period {
    if t < returns.n_periods() {
        returns.periods()[t]
    } else {
        returns.last_period().succ()
    }
}

fn scored_range(returns: &ReturnsMatrix, config: &BacktestConfig) -> Result<usize> {
    let end_idx = returns
        .index_of(config.in_sample_end)
        .expect("validated in_sample_end");
    let first_scored = end_idx + 1;
    if first_scored >= returns.n_periods() {
        return Err(Error::TooFewPeriods {
            what: "scored periods",
            got: 0,
            need: 1,
        });
    }
    if first_scored < config.window_len {
        return Err(Error::InsufficientHistory {
            needed: config.window_len,
            available: first_scored,
            first_scored: returns.periods()[first_scored],
        });
    }
    Ok(first_scored)
}

/// Reference CVaR levels for every window of the run, computed in
/// parallel. Indexed by window offset from `first_scored`.
fn window_c_refs(
    returns: &ReturnsMatrix,
    q: usize,
    betas: &BetaLevels,
    solver: &SolverOptions,
    first_scored: usize,
) -> Result<Vec<Vec<f64>>> {
    (first_scored..returns.n_periods() + 1)
        .into_par_iter()
        .map(|t| {
            let win = returns.window(t, q)?;
            compute_c_refs(&win, betas, solver).map_err(|e| tag_window(e, row_label(returns, t)))
        })
        .collect()
}

/// The RM weight chain: each window's solve anchors its turnover penalty
/// to the previous window's solution.
#[allow(clippy::too_many_arguments)]
fn rm_rows(
    returns: &ReturnsMatrix,
    q: usize,
    betas: &BetaLevels,
    lambda: f64,
    w_init: PortfolioWeights,
    solver: &SolverOptions,
    first_scored: usize,
    c_refs: &[Vec<f64>],
) -> Result<Vec<PortfolioWeights>> {
    debug_assert_eq!(c_refs.len(), returns.n_periods() + 1 - first_scored);
    let mut rows = Vec::with_capacity(c_refs.len());
    let mut w_prev = w_init;
    for t in first_scored..returns.n_periods() + 1 {
        let win = returns.window(t, q)?;
        let refs = &c_refs[t - first_scored];
        let solved = solve_rm_cvar(&win, betas, lambda, &w_prev, refs, solver)
            .map_err(|e| tag_window(e, row_label(returns, t)))?;
        w_prev = solved.weights.clone();
        rows.push(solved.weights);
    }
    Ok(rows)
}

/// Run one strategy across the data. Scored periods are everything after
/// `in_sample_end`; each gets weights solved on the `window_len` periods
/// before it, and a final row recommends weights for the month after the
/// data ends.
pub fn run_backtest(returns: &ReturnsMatrix, config: &BacktestConfig) -> Result<WeightsPath> {
    config.validate(returns)?;
    let first_scored = scored_range(returns, config)?;
    let n = returns.n_assets();
    let q = config.window_len;
    let ends: Vec<usize> = (first_scored..returns.n_periods() + 1).collect();

    let rows: Vec<PortfolioWeights> = match &config.strategy {
        Strategy::EqualWeight => vec![PortfolioWeights::equal(n); ends.len()],
        Strategy::MinCvar { beta } => ends
            .par_iter()
            .map(|&t| {
                let win = returns.window(t, q)?;
                solve_min_cvar(&win, *beta, &config.solver)
                    .map(|r| r.weights)
                    .map_err(|e| tag_window(e, row_label(returns, t)))
            })
            .collect::<Result<_>>()?,
        Strategy::AvgCvar { betas } => ends
            .par_iter()
            .map(|&t| {
                let win = returns.window(t, q)?;
                average_cvar_portfolio(&win, betas, &config.solver)
                    .map_err(|e| tag_window(e, row_label(returns, t)))
            })
            .collect::<Result<_>>()?,
        Strategy::RmCvar { betas, lambda } => {
            let c_refs = window_c_refs(returns, q, betas, &config.solver, first_scored)?;
            rm_rows(
                returns,
                q,
                betas,
                *lambda,
                config.w_init_or_equal(n),
                &config.solver,
                first_scored,
                &c_refs,
            )?
        }
    };

    Ok(WeightsPath::from_rows(
        returns.asset_names().to_vec(),
        returns.periods()[first_scored],
        rows,
    ))
}

/// Hyperparameter grid for the RM strategy: every window length crossed
/// with every penalty value.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub window_lens: Vec<usize>,
    pub lambdas: Vec<f64>,
}

/// Everything a sweep holds fixed while the grid varies.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub in_sample_end: Period,
    pub w_init: Option<PortfolioWeights>,
    pub solver: SolverOptions,
    pub periods_per_year: u32,
    pub drift: DriftMode,
}

/// One grid point with its in-sample report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub window_len: usize,
    pub lambda: f64,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    /// Grid order: window lengths outer, penalties inner.
    pub entries: Vec<SweepEntry>,
    /// Index of the entry with the best in-sample return/risk ratio;
    /// earliest entry wins ties.
    pub best_index: usize,
}

impl SweepOutcome {
    pub fn best(&self) -> &SweepEntry {
        &self.entries[self.best_index]
    }
}

/// Score every grid point on data up to `in_sample_end` and pick the
/// return/risk maximizer. Each window length's per-window reference
/// levels are computed once and shared across penalty values.
pub fn sweep_hyperparameters(
    returns: &ReturnsMatrix,
    betas: &BetaLevels,
    grid: &SweepGrid,
    settings: &SweepSettings,
) -> Result<SweepOutcome> {
    if grid.window_lens.is_empty() || grid.lambdas.is_empty() {
        return Err(Error::InvalidInput("empty hyperparameter grid".into()));
    }
    for &l in &grid.lambdas {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::NegativeLambda(l));
        }
    }
    let in_sample = slice_period(returns, returns.first_period(), settings.in_sample_end)?;
    let n = in_sample.n_assets();
    let w_init = settings
        .w_init
        .clone()
        .unwrap_or_else(|| PortfolioWeights::equal(n));

    let mut entries = Vec::with_capacity(grid.window_lens.len() * grid.lambdas.len());
    for &q in &grid.window_lens {
        if in_sample.n_periods() < q + 1 {
            return Err(Error::TooFewPeriods {
                what: "in-sample periods",
                got: in_sample.n_periods(),
                need: q + 1,
            });
        }
        for &b in betas.as_slice() {
            tail_mass(q, b)?;
        }
        let c_refs = window_c_refs(&in_sample, q, betas, &settings.solver, q)?;
        let batch: Vec<SweepEntry> = grid
            .lambdas
            .par_iter()
            .map(|&lambda| {
                let rows = rm_rows(
                    &in_sample,
                    q,
                    betas,
                    lambda,
                    w_init.clone(),
                    &settings.solver,
                    q,
                    &c_refs,
                )?;
                let path = WeightsPath::from_rows(
                    in_sample.asset_names().to_vec(),
                    in_sample.periods()[q],
                    rows,
                );
                let report = compute_metrics(
                    &path,
                    &in_sample,
                    settings.periods_per_year,
                    settings.drift,
                )?;
                Ok(SweepEntry {
                    window_len: q,
                    lambda,
                    report,
                })
            })
            .collect::<Result<_>>()?;
        entries.extend(batch);
    }

    let mut best_index = 0;
    let mut best_rr = f64::NAN;
    for (i, e) in entries.iter().enumerate() {
        if !e.report.rr.is_nan() && !(e.report.rr <= best_rr) {
            best_rr = e.report.rr;
            best_index = i;
        }
    }
    Ok(SweepOutcome {
        entries,
        best_index,
    })
}
