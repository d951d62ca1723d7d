//! Return-panel ingestion: YYYYMM periods, the validated `ReturnsMatrix`,
//! a reader for raw Ken-French-library CSV exports, and the canonical CSV
//! interchange format (`period,asset1,...,assetN` in decimal fractions).

use crate::cvar::SampleWindow;
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// A calendar month, printed and parsed as YYYYMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    year: i32,
    month: u32,
}

impl Period {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::BadPeriod(format!("month {month} outside 1..=12")));
        }
        if !(1800..=3000).contains(&year) {
            return Err(Error::BadPeriod(format!("implausible year {year}")));
        }
        Ok(Period { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    /// The following month.
    pub fn succ(self) -> Period {
        if self.month == 12 {
            Period {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Period {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(&self, other: &Period) -> i64 {
        (self.year as i64 - other.year as i64) * 12 + (self.month as i64 - other.month as i64)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}{:02}", self.year, self.month)
    }
}

impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.len() != 6 || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::BadPeriod(format!("'{s}' is not YYYYMM")));
        }
        let year: i32 = t[..4].parse().expect("digits");
        let month: u32 = t[4..].parse().expect("digits");
        Period::new(year, month)
    }
}

/// Which Ken-French panel to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Panel {
    #[default]
    ValueWeighted,
    EqualWeighted,
}

/// An n-asset monthly return panel with contiguous period labels.
/// Values are simple returns as decimal fractions, stored period-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    asset_names: Vec<String>,
    periods: Vec<Period>,
    values: Vec<f64>,
}

impl ReturnsMatrix {
    pub fn new(asset_names: Vec<String>, periods: Vec<Period>, values: Vec<f64>) -> Result<Self> {
        let n = asset_names.len();
        if n == 0 {
            return Err(Error::InvalidInput("no assets".into()));
        }
        if periods.is_empty() {
            return Err(Error::EmptyRange("no periods".into()));
        }
        for name in &asset_names {
            if name.is_empty() || name.contains(',') || name.contains('\n') {
                return Err(Error::InvalidInput(format!("bad asset name '{name}'")));
            }
        }
        if values.len() != n * periods.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} assets x {} periods",
                values.len(),
                n,
                periods.len()
            )));
        }
        for pair in periods.windows(2) {
            if pair[1] != pair[0].succ() {
                return Err(Error::BadPeriod(format!(
                    "periods not contiguous: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for (pos, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite return at flat index {pos}"
                )));
            }
            if v <= -1.0 {
                let t = pos / n;
                return Err(Error::ReturnBelowNeg100 {
                    value: v,
                    context: format!("{} / {}", periods[t], asset_names[pos % n]),
                });
            }
        }
        Ok(ReturnsMatrix {
            asset_names,
            periods,
            values,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.asset_names.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn first_period(&self) -> Period {
        self.periods[0]
    }

    pub fn last_period(&self) -> Period {
        *self.periods.last().unwrap()
    }

    /// All asset returns for period index `t`.
    pub fn period_col(&self, t: usize) -> &[f64] {
        let n = self.n_assets();
        &self.values[t * n..(t + 1) * n]
    }

    /// Index of `p`, if it lies inside the panel. Contiguity makes this
    /// pure arithmetic.
    pub fn index_of(&self, p: Period) -> Option<usize> {
        let offset = p.months_since(&self.first_period());
        if offset >= 0 && (offset as usize) < self.n_periods() {
            Some(offset as usize)
        } else {
            None
        }
    }

    /// Copy the `len` periods ending just before index `end` into a solve
    /// window.
    pub fn window(&self, end: usize, len: usize) -> Result<SampleWindow> {
        if len > end || end > self.n_periods() {
            return Err(Error::InvalidInput(format!(
                "window of {len} periods ending at index {end} out of bounds"
            )));
        }
        let n = self.n_assets();
        SampleWindow::new(n, self.values[(end - len) * n..end * n].to_vec())
    }
}

/// Contiguous sub-panel from `start` through `end`, inclusive.
pub fn slice_period(m: &ReturnsMatrix, start: Period, end: Period) -> Result<ReturnsMatrix> {
    if start > end {
        return Err(Error::EmptyRange(format!("{start} after {end}")));
    }
    let range = (m.first_period(), m.last_period());
    let s = m.index_of(start).ok_or(Error::OutOfRange {
        requested: start,
        first: range.0,
        last: range.1,
    })?;
    let e = m.index_of(end).ok_or(Error::OutOfRange {
        requested: end,
        first: range.0,
        last: range.1,
    })?;
    let n = m.n_assets();
    ReturnsMatrix::new(
        m.asset_names.clone(),
        m.periods[s..=e].to_vec(),
        m.values[s * n..(e + 1) * n].to_vec(),
    )
}

const SENTINELS: [f64; 2] = [-99.99, -999.0];

/// Parse a raw Ken-French-library CSV export: preamble text, a section
/// banner naming the panel and frequency, a header row of portfolio names,
/// then YYYYMM-keyed rows of percent returns. Sentinel values (-99.99,
/// -999) mark missing cells; any of them surviving inside the retained
/// range is a hard error listing every offending cell. `range` limits the
/// retained periods (inclusive); `None` keeps the whole section.
pub fn parse_ff_csv(
    text: &str,
    panel: Panel,
    range: Option<(Period, Period)>,
) -> Result<ReturnsMatrix> {
    let wanted = match panel {
        Panel::ValueWeighted => "value weighted returns",
        Panel::EqualWeighted => "equal weighted returns",
    };
    let mut lines = text.lines().peekable();
    let mut found_banner = false;
    for line in lines.by_ref() {
        let lower = line.to_lowercase();
        if lower.contains(wanted) && lower.contains("monthly") {
            found_banner = true;
            break;
        }
    }
    if !found_banner {
        return Err(Error::UnrecognizedLayout(format!(
            "no monthly '{wanted}' section banner found"
        )));
    }

    let header = loop {
        match lines.next() {
            Some(l) if l.trim().is_empty() => continue,
            Some(l) => break l,
            None => {
                return Err(Error::UnrecognizedLayout(
                    "section banner not followed by a header row".into(),
                ))
            }
        }
    };
    let mut cells = header.split(',');
    let lead = cells.next().unwrap_or("");
    if !lead.trim().is_empty() {
        return Err(Error::UnrecognizedLayout(format!(
            "header row starts with '{lead}', expected an empty label cell"
        )));
    }
    let asset_names: Vec<String> = cells.map(|c| c.trim().to_string()).collect();
    if asset_names.is_empty() || asset_names.iter().any(|n| n.is_empty()) {
        return Err(Error::UnrecognizedLayout(
            "header row has empty portfolio names".into(),
        ));
    }
    let n = asset_names.len();

    let mut periods: Vec<Period> = Vec::new();
    let mut cells_opt: Vec<Option<f64>> = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            break;
        }
        let mut parts = line.split(',');
        let key = parts.next().unwrap_or("").trim();
        let period: Period = match key.parse() {
            Ok(p) => p,
            // A non-YYYYMM key (annual rows, the next banner) ends the
            // monthly section.
            Err(_) => break,
        };
        let row: Vec<&str> = parts.collect();
        if row.len() != n {
            return Err(Error::UnrecognizedLayout(format!(
                "row {period} has {} values, header has {n} names",
                row.len()
            )));
        }
        if let Some(last) = periods.last() {
            if period != last.succ() {
                return Err(Error::BadPeriod(format!(
                    "periods not contiguous: {last} then {period}"
                )));
            }
        }
        periods.push(period);
        for cell in row {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::UnrecognizedLayout(format!("unparseable value '{cell}' at {period}"))
            })?;
            if SENTINELS.contains(&v) {
                cells_opt.push(None);
            } else {
                cells_opt.push(Some(v / 100.0));
            }
        }
    }
    if periods.is_empty() {
        return Err(Error::UnrecognizedLayout(
            "section has no YYYYMM data rows".into(),
        ));
    }

    let (s, e) = match range {
        None => (0, periods.len() - 1),
        Some((start, end)) => {
            if start > end {
                return Err(Error::EmptyRange(format!("{start} after {end}")));
            }
            let bounds = (periods[0], *periods.last().unwrap());
            let find = |p: Period| -> Result<usize> {
                let off = p.months_since(&bounds.0);
                if off >= 0 && (off as usize) < periods.len() {
                    Ok(off as usize)
                } else {
                    Err(Error::OutOfRange {
                        requested: p,
                        first: bounds.0,
                        last: bounds.1,
                    })
                }
            };
            (find(start)?, find(end)?)
        }
    };
    let retained = e - s + 1;
    if retained < 2 {
        return Err(Error::TooFewPeriods {
            what: "ingested panel",
            got: retained,
            need: 2,
        });
    }

    let mut missing: Vec<(Period, String)> = Vec::new();
    for t in s..=e {
        for i in 0..n {
            if cells_opt[t * n + i].is_none() {
                missing.push((periods[t], asset_names[i].clone()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingDataInRange { cells: missing });
    }

    let values: Vec<f64> = cells_opt[s * n..(e + 1) * n]
        .iter()
        .map(|c| c.unwrap())
        .collect();
    ReturnsMatrix::new(asset_names, periods[s..=e].to_vec(), values)
}

/// Canonical CSV: header `period,asset1,...,assetN`, one row per period,
/// decimal fractions printed with shortest round-trip formatting.
pub fn write_canonical_csv(m: &ReturnsMatrix) -> String {
    let mut out = String::new();
    out.push_str("period,");
    out.push_str(&m.asset_names().join(","));
    out.push('\n');
    for (t, p) in m.periods().iter().enumerate() {
        out.push_str(&p.to_string());
        for v in m.period_col(t) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Inverse of `write_canonical_csv`. Round-trips bit-exactly.
pub fn read_canonical_csv(text: &str) -> Result<ReturnsMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::UnrecognizedLayout("empty file".into()))?;
    let mut cells = header.split(',');
    if cells.next() != Some("period") {
        return Err(Error::UnrecognizedLayout(
            "canonical header must start with 'period'".into(),
        ));
    }
    let asset_names: Vec<String> = cells.map(|c| c.to_string()).collect();
    if asset_names.is_empty() {
        return Err(Error::UnrecognizedLayout("header has no assets".into()));
    }
    let n = asset_names.len();
    let mut periods = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let period: Period = parts.next().unwrap().parse()?;
        let mut count = 0;
        for cell in parts {
            let v: f64 = cell.parse().map_err(|_| {
                Error::UnrecognizedLayout(format!(
                    "unparseable value '{cell}' on data line {}",
                    lineno + 1
                ))
            })?;
            values.push(v);
            count += 1;
        }
        if count != n {
            return Err(Error::UnrecognizedLayout(format!(
                "row {period} has {count} values, header has {n} names"
            )));
        }
        periods.push(period);
    }
    ReturnsMatrix::new(asset_names, periods, values)
}
