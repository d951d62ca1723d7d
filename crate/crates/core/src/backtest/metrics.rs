//! Performance measures over realized return series and weight paths.
//! Annualization scales by `periods_per_year` (12 for monthly data).

use super::WeightsPath;
use crate::cvar::PortfolioWeights;
use crate::data::{Period, ReturnsMatrix};
use crate::error::{Error, Result};
use serde::Serialize;

/// Realized per-period portfolio returns, labeled by period.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub periods: Vec<Period>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    /// Two-column CSV: `period,return`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,return\n");
        for (p, v) in self.periods.iter().zip(&self.values) {
            out.push_str(&format!("{p},{v}\n"));
        }
        out
    }
}

/// The report block every backtest run produces. Percent-like fields stay
/// as decimal fractions here; rendering to percent happens at the edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub ar: f64,
    pub risk: f64,
    pub rr: f64,
    pub maxdd: f64,
    pub to: f64,
}

/// How weights drift over a holding period before rebalancing: by gross
/// growth factors 1 + r (the economically meaningful reading, default) or
/// by the raw returns themselves (kept for auditability).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftMode {
    #[default]
    Gross,
    Net,
}

fn check_returns(values: &[f64], what: &'static str) -> Result<()> {
    for &v in values {
        if v <= -1.0 {
            return Err(Error::ReturnBelowNeg100 {
                value: v,
                context: what.to_string(),
            });
        }
    }
    Ok(())
}

/// Per-period portfolio returns of a weight path over a return panel. Rows
/// are matched to panel columns by period label; the final row (the
/// next-period recommendation) has no realized return and is skipped.
pub fn portfolio_returns(path: &WeightsPath, returns: &ReturnsMatrix) -> Result<ReturnSeries> {
    if path.asset_names() != returns.asset_names() {
        return Err(Error::LabelMisalignment(
            "weight path and return panel name different assets".into(),
        ));
    }
    let mut periods = Vec::new();
    let mut values = Vec::new();
    for t in 0..path.n_rows() {
        let label = path.period(t);
        match returns.index_of(label) {
            Some(col) => {
                let r: f64 = path
                    .row(t)
                    .iter()
                    .zip(returns.period_col(col))
                    .map(|(w, r)| w * r)
                    .sum();
                periods.push(label);
                values.push(r);
            }
            None => {
                if t == path.n_rows() - 1 && label > returns.last_period() {
                    continue;
                }
                return Err(Error::LabelMisalignment(format!(
                    "weight row {label} has no matching return period"
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(Error::TooFewPeriods {
            what: "scored periods",
            got: 0,
            need: 1,
        });
    }
    Ok(ReturnSeries { periods, values })
}

/// Geometric annualization: `prod(1 + R_t)^(ppy / T) - 1`.
pub fn annualized_return(values: &[f64], periods_per_year: u32) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::TooFewPeriods {
            what: "annualized return",
            got: 0,
            need: 1,
        });
    }
    check_returns(values, "annualized return input")?;
    let growth: f64 = values.iter().map(|r| 1.0 + r).product();
    Ok(growth.powf(periods_per_year as f64 / values.len() as f64) - 1.0)
}

/// Annualized deviation: `sqrt(ppy / (T - 1) * sum (R_t - mean)^2)`.
pub fn annualized_risk(values: &[f64], periods_per_year: u32) -> Result<f64> {
    let t = values.len();
    if t < 2 {
        return Err(Error::TooFewPeriods {
            what: "annualized risk",
            got: t,
            need: 2,
        });
    }
    let mean = values.iter().sum::<f64>() / t as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((periods_per_year as f64 / (t - 1) as f64 * ss).sqrt())
}

/// Worst peak-to-trough decline of cumulative wealth, as a nonpositive
/// fraction. The peak tracks realized wealth from the first period on.
pub fn max_drawdown(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::TooFewPeriods {
            what: "max drawdown",
            got: 0,
            need: 1,
        });
    }
    check_returns(values, "max drawdown input")?;
    let mut wealth = 1.0;
    let mut peak = f64::MIN_POSITIVE;
    let mut worst = 0.0f64;
    for &r in values {
        wealth *= 1.0 + r;
        if wealth > peak {
            peak = wealth;
        }
        worst = worst.min(wealth / peak - 1.0);
    }
    Ok(worst)
}

fn drift_raw(weights: &[f64], returns: &[f64], mode: DriftMode) -> Result<Vec<f64>> {
    if weights.len() != returns.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights against {} returns",
            weights.len(),
            returns.len()
        )));
    }
    let factor = |r: f64| match mode {
        DriftMode::Gross => 1.0 + r,
        DriftMode::Net => r,
    };
    let denom: f64 = weights
        .iter()
        .zip(returns)
        .map(|(w, &r)| w * factor(r))
        .sum();
    if denom.abs() < 1e-12 {
        return Err(Error::ZeroDenominator);
    }
    Ok(weights
        .iter()
        .zip(returns)
        .map(|(w, &r)| w * factor(r) / denom)
        .collect())
}

/// Where the portfolio drifts to over one holding period: element-wise
/// growth renormalized to sum one. Returns are simple returns; growth uses
/// gross factors 1 + r.
pub fn renormalize_pre_trade(
    w_prev: &PortfolioWeights,
    returns: &[f64],
) -> Result<PortfolioWeights> {
    check_returns(returns, "pre-trade renormalization")?;
    let drifted = drift_raw(w_prev.as_slice(), returns, DriftMode::Gross)?;
    PortfolioWeights::new(drifted)
}

/// Annualized two-sided turnover: `ppy / (2 (T-1)) * sum_t |w_t - w+_{t-1}|_1`
/// where `w+` is the previous row drifted through the period it was held
/// and T counts the weight rows.
pub fn turnover(
    path: &WeightsPath,
    returns: &ReturnsMatrix,
    periods_per_year: u32,
    mode: DriftMode,
) -> Result<f64> {
    if path.n_rows() < 2 {
        return Err(Error::TooFewPeriods {
            what: "turnover",
            got: path.n_rows(),
            need: 2,
        });
    }
    if path.asset_names() != returns.asset_names() {
        return Err(Error::LabelMisalignment(
            "weight path and return panel name different assets".into(),
        ));
    }
    let mut total = 0.0;
    for t in 1..path.n_rows() {
        let held = path.period(t - 1);
        let col = returns.index_of(held).ok_or_else(|| {
            Error::LabelMisalignment(format!("no returns for held period {held}"))
        })?;
        let drifted = drift_raw(path.row(t - 1), returns.period_col(col), mode)?;
        total += path
            .row(t)
            .iter()
            .zip(&drifted)
            .map(|(w, d)| (w - d).abs())
            .sum::<f64>();
    }
    Ok(periods_per_year as f64 / (2.0 * (path.n_rows() - 1) as f64) * total)
}

/// Mean L1 distance between two aligned weight paths.
pub fn weight_diff(a: &WeightsPath, b: &WeightsPath) -> Result<f64> {
    if a.asset_names() != b.asset_names() {
        return Err(Error::LabelMisalignment(
            "paths name different assets".into(),
        ));
    }
    if a.n_rows() != b.n_rows() || a.periods() != b.periods() {
        return Err(Error::LabelMisalignment(
            "paths cover different periods".into(),
        ));
    }
    let mut total = 0.0;
    for t in 0..a.n_rows() {
        total += a
            .row(t)
            .iter()
            .zip(b.row(t))
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>();
    }
    Ok(total / a.n_rows() as f64)
}

/// Bundle the standard report: realized returns, annualized return and
/// risk, their ratio, max drawdown, and turnover.
pub fn compute_metrics(
    path: &WeightsPath,
    returns: &ReturnsMatrix,
    periods_per_year: u32,
    mode: DriftMode,
) -> Result<MetricsReport> {
    let series = portfolio_returns(path, returns)?;
    let ar = annualized_return(&series.values, periods_per_year)?;
    let risk = annualized_risk(&series.values, periods_per_year)?;
    let maxdd = max_drawdown(&series.values)?;
    let to = turnover(path, returns, periods_per_year, mode)?;
    Ok(MetricsReport {
        ar,
        risk,
        rr: ar / risk,
        maxdd,
        to,
    })
}
