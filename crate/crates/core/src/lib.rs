//! Portfolio construction by CVaR minimization over sampled returns.
//!
//! The crate covers four layers:
//!
//! * [`lp`]: a dense two-phase simplex solver for small linear programs.
//! * [`cvar`]: single-level minimum-CVaR portfolios, the multi-level
//!   variant that bounds every tail level at once while penalizing
//!   turnover, and the closed-form CVaR evaluator they are checked
//!   against.
//! * [`backtest`]: rolling-window rebalancing, performance measures, and
//!   hyperparameter sweeps.
//! * [`data`]: monthly return panels, including the Ken French research
//!   library CSV layout and a canonical round-trippable CSV format.

pub mod backtest;
pub mod cvar;
pub mod data;
mod error;
pub mod lp;

pub use backtest::metrics::{DriftMode, MetricsReport, ReturnSeries};
pub use backtest::{
    run_backtest, sweep_hyperparameters, BacktestConfig, Strategy, SweepEntry, SweepGrid,
    SweepOutcome, SweepSettings, WeightsPath,
};
pub use cvar::{
    BetaLevels, CvarSolveResult, PortfolioWeights, RmCvarResult, SampleWindow,
};
pub use data::{Panel, Period, ReturnsMatrix};
pub use error::{Error, Result};
pub use lp::{LpProblem, LpSolution, LpStatus, SolverOptions};
