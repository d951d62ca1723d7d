use crate::lp::LpStatus;
use crate::data::Period;

/// Crate-wide error type. Variants are grouped by the layer that raises them:
/// problem construction, LP solving, portfolio math, backtesting, and data
/// ingestion.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An LP was built with inconsistent dimensions or non-finite
    /// coefficients.
    #[error("malformed LP: {0}")]
    MalformedProblem(String),

    /// The solver stopped without an optimal solution. `context` names the
    /// model and, inside a backtest, the window that produced it.
    #[error("LP solve failed with status {status:?} ({context})")]
    SolverFailed { status: LpStatus, context: String },

    /// Q*(1-beta) < 1: the tail holds less than one sample and the CVaR
    /// estimator is undefined.
    #[error("empty tail: Q={q} at beta={beta} leaves {mass:.6} tail samples")]
    EmptyTail { q: usize, beta: f64, mass: f64 },

    /// The turnover penalty coefficient must be nonnegative.
    #[error("negative lambda: {0}")]
    NegativeLambda(f64),

    /// Vector or matrix shapes disagree (weights vs assets, paths vs panels).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A value failed a domain check (weights not summing to one, beta
    /// outside (0,1), and similar).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The backtest needs Q periods of history before the first scored
    /// period and the dataset does not have them.
    #[error("insufficient history: window needs {needed} periods, {available} available before {first_scored}")]
    InsufficientHistory {
        needed: usize,
        available: usize,
        first_scored: Period,
    },

    /// Weight rows and return columns could not be aligned by period label.
    #[error("label misalignment: {0}")]
    LabelMisalignment(String),

    /// A simple return at or below -100% makes compounding meaningless.
    #[error("return below -100% at {context}: {value}")]
    ReturnBelowNeg100 { value: f64, context: String },

    /// A statistic needs more observations than the series provides.
    #[error("too few periods for {what}: got {got}, need at least {need}")]
    TooFewPeriods {
        what: &'static str,
        got: usize,
        need: usize,
    },

    /// Pre-trade renormalization hit a zero portfolio gross value.
    #[error("zero denominator in pre-trade renormalization")]
    ZeroDenominator,

    /// The input text does not look like a Ken-French-library CSV with the
    /// requested section.
    #[error("unrecognized data layout: {0}")]
    UnrecognizedLayout(String),

    /// Missing-value sentinels survived inside the requested period range.
    /// Carries every offending (period, asset) cell.
    #[error("missing data in range: {} cell(s), first at {} / {}", cells.len(), cells[0].0, cells[0].1)]
    MissingDataInRange { cells: Vec<(Period, String)> },

    /// A period slice selected zero periods.
    #[error("empty period range: {0}")]
    EmptyRange(String),

    /// A requested period lies outside the dataset.
    #[error("period out of range: {requested} not within [{first}, {last}]")]
    OutOfRange {
        requested: Period,
        first: Period,
        last: Period,
    },

    /// A period label failed to parse or periods are not contiguous.
    #[error("bad period: {0}")]
    BadPeriod(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
