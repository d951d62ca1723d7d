//! Dense linear programming. `LpProblem` holds a minimization problem in
//! inequality/equality form with per-variable bounds; `solve_lp` runs a
//! two-phase revised simplex over the standard-form conversion.

mod simplex;

pub use simplex::solve_lp;

use crate::error::{Error, Result};

/// Lower/upper bound pair for one variable. Either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBound {
    pub lower: f64,
    pub upper: f64,
}

impl VarBound {
    pub fn free() -> Self {
        VarBound {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn non_negative() -> Self {
        VarBound {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }
}

/// Minimize `objective . x` subject to `a_ineq x <= b_ineq`,
/// `a_eq x = b_eq`, and the per-variable bounds. Rows are stored dense.
#[derive(Debug, Clone)]
pub struct LpProblem {
    n_vars: usize,
    objective: Vec<f64>,
    a_ineq: Vec<f64>,
    b_ineq: Vec<f64>,
    a_eq: Vec<f64>,
    b_eq: Vec<f64>,
    bounds: Vec<VarBound>,
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::MalformedProblem(format!(
            "non-finite value in {what}"
        )));
    }
    Ok(())
}

impl LpProblem {
    /// Start a problem with the given objective. Variables default to free;
    /// call `set_bounds` to restrict them.
    pub fn new(objective: Vec<f64>) -> Result<Self> {
        if objective.is_empty() {
            return Err(Error::MalformedProblem("no variables".into()));
        }
        check_finite(&objective, "objective")?;
        let n = objective.len();
        Ok(LpProblem {
            n_vars: n,
            objective,
            a_ineq: Vec::new(),
            b_ineq: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            bounds: vec![VarBound::free(); n],
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_ineq(&self) -> usize {
        self.b_ineq.len()
    }

    pub fn n_eq(&self) -> usize {
        self.b_eq.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[VarBound] {
        &self.bounds
    }

    pub fn ineq_row(&self, i: usize) -> (&[f64], f64) {
        let n = self.n_vars;
        (&self.a_ineq[i * n..(i + 1) * n], self.b_ineq[i])
    }

    pub fn eq_row(&self, i: usize) -> (&[f64], f64) {
        let n = self.n_vars;
        (&self.a_eq[i * n..(i + 1) * n], self.b_eq[i])
    }

    /// Add a row `coeffs . x <= rhs`.
    pub fn add_ineq(&mut self, coeffs: &[f64], rhs: f64) -> Result<()> {
        self.check_row(coeffs, rhs)?;
        self.a_ineq.extend_from_slice(coeffs);
        self.b_ineq.push(rhs);
        Ok(())
    }

    /// Add a row `coeffs . x = rhs`.
    pub fn add_eq(&mut self, coeffs: &[f64], rhs: f64) -> Result<()> {
        self.check_row(coeffs, rhs)?;
        self.a_eq.extend_from_slice(coeffs);
        self.b_eq.push(rhs);
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.n_vars {
            return Err(Error::MalformedProblem(format!(
                "bound for variable {var} but problem has {} variables",
                self.n_vars
            )));
        }
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::MalformedProblem("NaN bound".into()));
        }
        if lower > upper {
            return Err(Error::MalformedProblem(format!(
                "crossed bounds for variable {var}: [{lower}, {upper}]"
            )));
        }
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::MalformedProblem(format!(
                "unsatisfiable bound for variable {var}"
            )));
        }
        self.bounds[var] = VarBound { lower, upper };
        Ok(())
    }

    fn check_row(&self, coeffs: &[f64], rhs: f64) -> Result<()> {
        if coeffs.len() != self.n_vars {
            return Err(Error::MalformedProblem(format!(
                "row has {} coefficients, problem has {} variables",
                coeffs.len(),
                self.n_vars
            )));
        }
        check_finite(coeffs, "constraint row")?;
        if !rhs.is_finite() {
            return Err(Error::MalformedProblem("non-finite rhs".into()));
        }
        Ok(())
    }

    /// Plain-text dump of the whole problem, one line per row and bound.
    /// Meant for fixture diffing and bug reports, not for machine parsing.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let join = |row: &[f64]| {
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        writeln!(out, "minimize {}", join(&self.objective)).unwrap();
        for i in 0..self.n_ineq() {
            let (row, rhs) = self.ineq_row(i);
            writeln!(out, "ineq {} <= {}", join(row), rhs).unwrap();
        }
        for i in 0..self.n_eq() {
            let (row, rhs) = self.eq_row(i);
            writeln!(out, "eq {} = {}", join(row), rhs).unwrap();
        }
        for b in &self.bounds {
            writeln!(out, "bound {} {}", b.lower, b.upper).unwrap();
        }
        out
    }
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solve output. `x` and `objective_value` are present only for `Optimal`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    pub iterations: usize,
}

/// Solver knobs. `max_iterations: None` means the size-scaled default
/// `50 * (n_vars + n_ineq + n_eq)` computed at solve time.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol_feas: f64,
    pub tol_pivot: f64,
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_feas: 1e-9,
            tol_pivot: 1e-10,
            max_iterations: None,
        }
    }
}

impl SolverOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol_feas > 0.0) || !(self.tol_pivot > 0.0) {
            return Err(Error::InvalidInput(
                "solver tolerances must be positive".into(),
            ));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidInput("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn iteration_budget(&self, p: &LpProblem) -> usize {
        self.max_iterations
            .unwrap_or(50 * (p.n_vars() + p.n_ineq() + p.n_eq()))
    }
}

/// Worst-case constraint residuals of a candidate point, computed straight
/// from the problem data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub max_ineq_violation: f64,
    pub max_eq_residual: f64,
    pub max_bound_violation: f64,
}

impl FeasibilityReport {
    pub fn max_violation(&self) -> f64 {
        self.max_ineq_violation
            .max(self.max_eq_residual)
            .max(self.max_bound_violation)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Measure how far `x` is from satisfying `problem`'s constraints.
pub fn check_feasibility(problem: &LpProblem, x: &[f64]) -> Result<FeasibilityReport> {
    if x.len() != problem.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} entries, problem has {} variables",
            x.len(),
            problem.n_vars()
        )));
    }
    let dot = |row: &[f64]| -> f64 { row.iter().zip(x).map(|(a, b)| a * b).sum() };
    let mut ineq: f64 = 0.0;
    for i in 0..problem.n_ineq() {
        let (row, rhs) = problem.ineq_row(i);
        ineq = ineq.max(dot(row) - rhs);
    }
    let mut eq: f64 = 0.0;
    for i in 0..problem.n_eq() {
        let (row, rhs) = problem.eq_row(i);
        eq = eq.max((dot(row) - rhs).abs());
    }
    let mut bound: f64 = 0.0;
    for (xi, b) in x.iter().zip(problem.bounds()) {
        bound = bound.max(b.lower - xi).max(xi - b.upper);
    }
    Ok(FeasibilityReport {
        max_ineq_violation: ineq.max(0.0),
        max_eq_residual: eq,
        max_bound_violation: bound.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_shape_errors() {
        assert!(LpProblem::new(vec![]).is_err());
        assert!(LpProblem::new(vec![1.0, f64::NAN]).is_err());
        let mut p = LpProblem::new(vec![1.0, 2.0]).unwrap();
        assert!(p.add_ineq(&[1.0], 0.0).is_err());
        assert!(p.add_ineq(&[1.0, f64::INFINITY], 0.0).is_err());
        assert!(p.add_eq(&[1.0, 1.0], f64::NAN).is_err());
        assert!(p.set_bounds(2, 0.0, 1.0).is_err());
        assert!(p.set_bounds(0, 1.0, 0.0).is_err());
        assert!(p.set_bounds(0, f64::NAN, 1.0).is_err());
        assert!(p.set_bounds(0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn dump_is_stable() {
        let mut p = LpProblem::new(vec![1.0, -0.5]).unwrap();
        p.add_ineq(&[1.0, 2.0], 3.0).unwrap();
        p.add_eq(&[1.0, 1.0], 1.0).unwrap();
        p.set_bounds(0, 0.0, f64::INFINITY).unwrap();
        let expected = "minimize 1 -0.5\n\
                        ineq 1 2 <= 3\n\
                        eq 1 1 = 1\n\
                        bound 0 inf\n\
                        bound -inf inf\n";
        assert_eq!(p.dump(), expected);
    }

    #[test]
    fn feasibility_report_measures_violations() {
        let mut p = LpProblem::new(vec![1.0, 1.0]).unwrap();
        p.add_ineq(&[1.0, 1.0], 1.0).unwrap();
        p.add_eq(&[1.0, -1.0], 0.0).unwrap();
        p.set_bounds(0, 0.0, f64::INFINITY).unwrap();
        p.set_bounds(1, 0.0, f64::INFINITY).unwrap();

        let r = check_feasibility(&p, &[0.5, 0.5]).unwrap();
        assert_eq!(r.max_violation(), 0.0);

        let r = check_feasibility(&p, &[1.0, 0.5]).unwrap();
        assert!((r.max_ineq_violation - 0.5).abs() < 1e-15);
        assert!((r.max_eq_residual - 0.5).abs() < 1e-15);
        assert_eq!(r.max_bound_violation, 0.0);

        let r = check_feasibility(&p, &[-0.25, 0.25]).unwrap();
        assert!((r.max_bound_violation - 0.25).abs() < 1e-15);

        assert!(check_feasibility(&p, &[1.0]).is_err());
    }
}
