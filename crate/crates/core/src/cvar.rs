//! Portfolio CVaR models: the closed-form sample CVaR of a fixed portfolio,
//! the single-level minimum-CVaR LP, and the multi-level variant that
//! penalizes turnover against a previous portfolio and controls every
//! confidence level at once.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, SolverOptions};
use rayon::prelude::*;

/// Weights below this magnitude are snapped to zero after a solve.
pub const WEIGHT_SNAP: f64 = 1e-10;
/// Constructor tolerance on the budget constraint.
pub const WEIGHT_SUM_TOL: f64 = 1e-8;

/// An n-asset return sample over Q periods, stored period-major.
#[derive(Debug, Clone)]
pub struct SampleWindow {
    n_assets: usize,
    returns: Vec<f64>,
}

impl SampleWindow {
    /// `returns[q * n_assets + i]` is asset i's simple return in period q.
    pub fn new(n_assets: usize, returns: Vec<f64>) -> Result<Self> {
        if n_assets == 0 {
            return Err(Error::InvalidInput("window has no assets".into()));
        }
        if returns.is_empty() || returns.len() % n_assets != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} return values do not tile {} assets",
                returns.len(),
                n_assets
            )));
        }
        let q = returns.len() / n_assets;
        if q < 2 {
            return Err(Error::TooFewPeriods {
                what: "sample window",
                got: q,
                need: 2,
            });
        }
        for (pos, &r) in returns.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite return at flat index {pos}"
                )));
            }
            if r <= -1.0 {
                return Err(Error::ReturnBelowNeg100 {
                    value: r,
                    context: format!("window flat index {pos}"),
                });
            }
        }
        Ok(SampleWindow { n_assets, returns })
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn n_periods(&self) -> usize {
        self.returns.len() / self.n_assets
    }

    pub fn period(&self, q: usize) -> &[f64] {
        &self.returns[q * self.n_assets..(q + 1) * self.n_assets]
    }
}

/// Strictly increasing confidence levels in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BetaLevels {
    betas: Vec<f64>,
}

impl BetaLevels {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidInput("no beta levels".into()));
        }
        for &b in &betas {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidInput(format!("beta {b} outside (0, 1)")));
            }
        }
        if betas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "beta levels must be strictly increasing".into(),
            ));
        }
        Ok(BetaLevels { betas })
    }

    pub fn single(beta: f64) -> Result<Self> {
        BetaLevels::new(vec![beta])
    }

    /// The grid used throughout the bundled experiments.
    pub fn default_grid() -> Self {
        BetaLevels {
            betas: vec![0.95, 0.96, 0.97, 0.98, 0.99],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }
}

/// Long-only weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights {
    w: Vec<f64>,
}

impl PortfolioWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        let sum: f64 = w.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        if let Some(&bad) = w.iter().find(|&&v| !(v >= -WEIGHT_SNAP)) {
            return Err(Error::InvalidInput(format!(
                "negative weight {bad} below tolerance"
            )));
        }
        Ok(PortfolioWeights { w })
    }

    pub fn equal(n: usize) -> Self {
        PortfolioWeights {
            w: vec![1.0 / n as f64; n.max(1)],
        }
    }

    /// Cleanup for any nonnegative direction vector: snap near-zero
    /// entries, then renormalize so the sum is exactly 1 (the residual
    /// lands on the largest weight).
    pub fn from_solution(raw: &[f64]) -> Self {
        let mut w: Vec<f64> = raw
            .iter()
            .map(|&v| if v.abs() < WEIGHT_SNAP { 0.0 } else { v.max(0.0) })
            .collect();
        let sum: f64 = w.iter().sum();
        debug_assert!(sum > 1e-6, "degenerate weight sum {sum}");
        for v in &mut w {
            *v /= sum;
            if *v < WEIGHT_SNAP {
                *v = 0.0;
            }
        }
        // Close the budget exactly: rewrite the last nonzero entry as
        // 1 minus the running sum before it. The left-to-right total then
        // rounds to 1.0 exactly, and the exact zeros after it keep it
        // there. Entries too small to absorb the correction are zeroed
        // and the correction moves left.
        let mut j = w.len();
        loop {
            debug_assert!(j > 0, "no weight can close the budget");
            j -= 1;
            if w[j] == 0.0 {
                continue;
            }
            let prefix: f64 = w[..j].iter().sum();
            let candidate = 1.0 - prefix;
            if candidate >= 0.0 {
                w[j] = candidate;
                break;
            }
            w[j] = 0.0;
        }
        PortfolioWeights { w }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn l1_distance(&self, other: &PortfolioWeights) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "weight vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .w
            .iter()
            .zip(&other.w)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// Single-level solve output. `cvar` is the optimal objective; `alpha` the
/// loss quantile the LP settled on.
#[derive(Debug, Clone)]
pub struct CvarSolveResult {
    pub weights: PortfolioWeights,
    pub alpha: f64,
    pub cvar: f64,
}

/// Multi-level solve output. `c_star` is the common excess level C;
/// `objective` the realized LP objective `c_star + lambda * |w - w_prev|_1`.
#[derive(Debug, Clone)]
pub struct RmCvarResult {
    pub weights: PortfolioWeights,
    pub c_star: f64,
    pub alphas: Vec<f64>,
    pub objective: f64,
}

/// Number of tail samples Q*(1-beta), snapped to the nearest integer when
/// within 1e-9 so binary rounding can't shrink or grow the tail by one
/// sample. Errors when the tail holds less than one sample.
pub fn tail_mass(q: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!("beta {beta} outside (0, 1)")));
    }
    let mut m = q as f64 * (1.0 - beta);
    let nearest = m.round();
    if (m - nearest).abs() < 1e-9 {
        m = nearest;
    }
    if m < 1.0 {
        return Err(Error::EmptyTail { q, beta, mass: m });
    }
    Ok(m)
}

fn check_weights_dim(weights: &PortfolioWeights, window: &SampleWindow) -> Result<()> {
    if weights.len() != window.n_assets() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} assets",
            weights.len(),
            window.n_assets()
        )));
    }
    Ok(())
}

/// Sample CVaR of a fixed portfolio at level `beta`, by the closed form:
/// the mean of the ceil(m) largest losses with the smallest of them
/// weighted by the fractional part of m = Q*(1-beta).
pub fn evaluate_cvar(weights: &PortfolioWeights, window: &SampleWindow, beta: f64) -> Result<f64> {
    check_weights_dim(weights, window)?;
    let q = window.n_periods();
    let m = tail_mass(q, beta)?;
    let w = weights.as_slice();
    let mut losses: Vec<f64> = (0..q)
        .map(|t| -window.period(t).iter().zip(w).map(|(r, wi)| r * wi).sum::<f64>())
        .collect();
    losses.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let k = m.ceil() as usize;
    let full: f64 = losses[..k - 1].iter().sum();
    Ok((full + (m - (k - 1) as f64) * losses[k - 1]) / m)
}

/// Assemble the minimum-CVaR LP. Variable layout, in order:
/// w_0..w_{n-1} (long-only weights), alpha (free), u_0..u_{Q-1} (excess
/// losses, nonnegative). Rows: per sample q, `-r_q . w - alpha - u_q <= 0`;
/// one equality `sum w = 1`. Objective: `alpha + (1/m) sum u`.
pub fn build_min_cvar_lp(window: &SampleWindow, beta: f64) -> Result<LpProblem> {
    let n = window.n_assets();
    let q = window.n_periods();
    let m = tail_mass(q, beta)?;
    let n_vars = n + 1 + q;

    let mut objective = vec![0.0; n_vars];
    objective[n] = 1.0;
    for v in &mut objective[n + 1..] {
        *v = 1.0 / m;
    }
    let mut lp = LpProblem::new(objective)?;

    let mut row = vec![0.0; n_vars];
    for t in 0..q {
        row.fill(0.0);
        for (i, &r) in window.period(t).iter().enumerate() {
            row[i] = -r;
        }
        row[n] = -1.0;
        row[n + 1 + t] = -1.0;
        lp.add_ineq(&row, 0.0)?;
    }
    row.fill(0.0);
    for v in &mut row[..n] {
        *v = 1.0;
    }
    lp.add_eq(&row, 1.0)?;

    for i in 0..n {
        lp.set_bounds(i, 0.0, f64::INFINITY)?;
    }
    for t in 0..q {
        lp.set_bounds(n + 1 + t, 0.0, f64::INFINITY)?;
    }
    Ok(lp)
}

fn expect_optimal(
    solution: crate::lp::LpSolution,
    context: &str,
) -> Result<(Vec<f64>, f64, usize)> {
    match solution.status {
        LpStatus::Optimal => Ok((
            solution.x.expect("optimal solution carries a point"),
            solution
                .objective_value
                .expect("optimal solution carries an objective"),
            solution.iterations,
        )),
        status => Err(Error::SolverFailed {
            status,
            context: context.to_string(),
        }),
    }
}

/// Minimize sample CVaR at one level over long-only full-investment
/// portfolios.
pub fn solve_min_cvar(
    window: &SampleWindow,
    beta: f64,
    options: &SolverOptions,
) -> Result<CvarSolveResult> {
    let lp = build_min_cvar_lp(window, beta)?;
    let (x, cvar, _) = expect_optimal(solve_lp(&lp, options)?, "min-CVaR")?;
    let n = window.n_assets();
    Ok(CvarSolveResult {
        weights: PortfolioWeights::from_solution(&x[..n]),
        alpha: x[n],
        cvar,
    })
}

/// Per-level reference values: the minimum attainable CVaR at each beta,
/// each from its own single-level solve on this window.
pub fn compute_c_refs(
    window: &SampleWindow,
    betas: &BetaLevels,
    options: &SolverOptions,
) -> Result<Vec<f64>> {
    let refs: Vec<f64> = betas
        .as_slice()
        .par_iter()
        .map(|&b| solve_min_cvar(window, b, options).map(|r| r.cvar))
        .collect::<Result<_>>()?;
    debug_assert!(
        refs.windows(2).all(|p| p[1] >= p[0] - 1e-8),
        "reference CVaR levels must be non-decreasing in beta: {refs:?}"
    );
    Ok(refs)
}

/// Assemble the multi-level LP. Variable layout, in order: C (free),
/// w_0..w_{n-1}, alpha_0..alpha_{K-1} (free), t_{q,k} for k-major blocks of
/// Q (nonnegative), u_0..u_{n-1} (nonnegative). Rows: per asset the two
/// turnover epigraph rows `±lambda (w_i - w_prev_i) <= u_i`; per (k, q) the
/// excess-loss row `-r_q . w - alpha_k - t_{q,k} <= 0`; per level k the
/// budgeted-CVaR row `alpha_k + (1/m_k) sum_q t_{q,k} - C <= c_refs[k]`;
/// one equality `sum w = 1`. Objective: `C + sum u`.
pub fn build_rm_cvar_lp(
    window: &SampleWindow,
    betas: &BetaLevels,
    lambda: f64,
    w_prev: &PortfolioWeights,
    c_refs: &[f64],
) -> Result<LpProblem> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::NegativeLambda(lambda));
    }
    check_weights_dim(w_prev, window)?;
    let kk = betas.len();
    if c_refs.len() != kk {
        return Err(Error::DimensionMismatch(format!(
            "{} reference levels for {} betas",
            c_refs.len(),
            kk
        )));
    }
    if c_refs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite reference level".into()));
    }
    let n = window.n_assets();
    let q = window.n_periods();
    let masses: Vec<f64> = betas
        .as_slice()
        .iter()
        .map(|&b| tail_mass(q, b))
        .collect::<Result<_>>()?;

    let c_col = 0;
    let w_col = |i: usize| 1 + i;
    let a_col = |k: usize| 1 + n + k;
    let t_col = |k: usize, t: usize| 1 + n + kk + k * q + t;
    let u_col = |i: usize| 1 + n + kk + kk * q + i;
    let n_vars = 1 + n + kk + kk * q + n;

    let mut objective = vec![0.0; n_vars];
    objective[c_col] = 1.0;
    for i in 0..n {
        objective[u_col(i)] = 1.0;
    }
    let mut lp = LpProblem::new(objective)?;

    let mut row = vec![0.0; n_vars];
    for i in 0..n {
        row.fill(0.0);
        row[w_col(i)] = lambda;
        row[u_col(i)] = -1.0;
        lp.add_ineq(&row, lambda * w_prev.as_slice()[i])?;
        row[w_col(i)] = -lambda;
        lp.add_ineq(&row, -lambda * w_prev.as_slice()[i])?;
    }
    for k in 0..kk {
        for t in 0..q {
            row.fill(0.0);
            for (i, &r) in window.period(t).iter().enumerate() {
                row[w_col(i)] = -r;
            }
            row[a_col(k)] = -1.0;
            row[t_col(k, t)] = -1.0;
            lp.add_ineq(&row, 0.0)?;
        }
    }
    for k in 0..kk {
        row.fill(0.0);
        row[a_col(k)] = 1.0;
        for t in 0..q {
            row[t_col(k, t)] = 1.0 / masses[k];
        }
        row[c_col] = -1.0;
        lp.add_ineq(&row, c_refs[k])?;
    }
    row.fill(0.0);
    for i in 0..n {
        row[w_col(i)] = 1.0;
    }
    lp.add_eq(&row, 1.0)?;

    for i in 0..n {
        lp.set_bounds(w_col(i), 0.0, f64::INFINITY)?;
    }
    for k in 0..kk {
        for t in 0..q {
            lp.set_bounds(t_col(k, t), 0.0, f64::INFINITY)?;
        }
    }
    for i in 0..n {
        lp.set_bounds(u_col(i), 0.0, f64::INFINITY)?;
    }
    Ok(lp)
}

/// Minimize the common excess level C over all betas plus the L1 turnover
/// penalty against `w_prev`. `c_refs` must come from `compute_c_refs` on
/// the same window and betas.
pub fn solve_rm_cvar(
    window: &SampleWindow,
    betas: &BetaLevels,
    lambda: f64,
    w_prev: &PortfolioWeights,
    c_refs: &[f64],
    options: &SolverOptions,
) -> Result<RmCvarResult> {
    let lp = build_rm_cvar_lp(window, betas, lambda, w_prev, c_refs)?;
    let (x, objective, _) = expect_optimal(solve_lp(&lp, options)?, "RM-CVaR")?;
    let n = window.n_assets();
    let kk = betas.len();
    Ok(RmCvarResult {
        weights: PortfolioWeights::from_solution(&x[1..1 + n]),
        c_star: x[0],
        alphas: x[1 + n..1 + n + kk].to_vec(),
        objective,
    })
}

/// Equal-weighted average of the K single-level minimum-CVaR portfolios.
pub fn average_cvar_portfolio(
    window: &SampleWindow,
    betas: &BetaLevels,
    options: &SolverOptions,
) -> Result<PortfolioWeights> {
    let solves: Vec<CvarSolveResult> = betas
        .as_slice()
        .par_iter()
        .map(|&b| solve_min_cvar(window, b, options))
        .collect::<Result<_>>()?;
    let n = window.n_assets();
    let kk = betas.len() as f64;
    let mut mean = vec![0.0; n];
    for s in &solves {
        for (m, &w) in mean.iter_mut().zip(s.weights.as_slice()) {
            *m += w / kk;
        }
    }
    Ok(PortfolioWeights::from_solution(&mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Single asset whose losses are 0.01, 0.02, ..., 0.20.
    fn ladder_window() -> SampleWindow {
        let returns: Vec<f64> = (1..=20).map(|i| -0.01 * i as f64).collect();
        SampleWindow::new(1, returns).unwrap()
    }

    #[test]
    fn cvar_closed_form_on_loss_ladder() {
        let w = PortfolioWeights::new(vec![1.0]).unwrap();
        let win = ladder_window();
        // m = 2: mean of the two largest losses.
        assert_relative_eq!(
            evaluate_cvar(&w, &win, 0.90).unwrap(),
            0.195,
            epsilon = 1e-12
        );
        // m = 1: the single largest loss.
        assert_relative_eq!(
            evaluate_cvar(&w, &win, 0.95).unwrap(),
            0.20,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cvar_fractional_tail() {
        // Q = 10, beta = 0.85 -> m = 1.5: (0.10 + 0.5 * 0.09) / 1.5.
        let returns: Vec<f64> = (1..=10).map(|i| -0.01 * i as f64).collect();
        let win = SampleWindow::new(1, returns).unwrap();
        let w = PortfolioWeights::new(vec![1.0]).unwrap();
        assert_relative_eq!(
            evaluate_cvar(&w, &win, 0.85).unwrap(),
            0.145 / 1.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cvar_rejects_empty_tail_and_bad_beta() {
        let returns: Vec<f64> = (1..=10).map(|i| -0.01 * i as f64).collect();
        let win = SampleWindow::new(1, returns).unwrap();
        let w = PortfolioWeights::new(vec![1.0]).unwrap();
        assert!(matches!(
            evaluate_cvar(&w, &win, 0.95),
            Err(Error::EmptyTail { .. })
        ));
        assert!(evaluate_cvar(&w, &win, 1.0).is_err());
        assert!(evaluate_cvar(&w, &win, 0.0).is_err());
        // Q = 10, beta = 0.9 must squeak through as exactly one tail sample.
        assert_relative_eq!(evaluate_cvar(&w, &win, 0.9).unwrap(), 0.10);
    }

    #[test]
    fn min_cvar_picks_the_dominant_asset() {
        // Asset 0 returns 2% every period, asset 1 returns 1%: asset 0 has
        // smaller loss in every sample, so it takes all the weight.
        let mut returns = Vec::new();
        for _ in 0..10 {
            returns.extend_from_slice(&[0.02, 0.01]);
        }
        let win = SampleWindow::new(2, returns).unwrap();
        let res = solve_min_cvar(&win, 0.9, &SolverOptions::default()).unwrap();
        assert_relative_eq!(res.weights.as_slice()[0], 1.0, epsilon = 1e-8);
        assert_relative_eq!(res.cvar, -0.02, epsilon = 1e-8);
        assert!(res.cvar >= res.alpha - 1e-8);
    }

    #[test]
    fn rm_cvar_single_level_zero_lambda_recovers_the_floor() {
        let mut returns = Vec::new();
        for t in 0..12 {
            returns.extend_from_slice(&[0.01 * (t as f64 - 6.0) / 6.0, -0.005 * (t % 3) as f64]);
        }
        let win = SampleWindow::new(2, returns).unwrap();
        let betas = BetaLevels::single(0.9).unwrap();
        let opts = SolverOptions::default();
        let refs = compute_c_refs(&win, &betas, &opts).unwrap();
        let prev = PortfolioWeights::equal(2);
        let res = solve_rm_cvar(&win, &betas, 0.0, &prev, &refs, &opts).unwrap();
        assert!(res.c_star >= -1e-8, "c_star = {}", res.c_star);
        assert!(res.c_star <= 1e-7, "c_star = {}", res.c_star);
        let achieved = evaluate_cvar(&res.weights, &win, 0.9).unwrap();
        assert_relative_eq!(achieved, refs[0], epsilon = 1e-7);
    }

    #[test]
    fn rm_cvar_validates_inputs() {
        let win = ladder_window();
        let betas = BetaLevels::single(0.9).unwrap();
        let prev = PortfolioWeights::equal(1);
        let opts = SolverOptions::default();
        assert!(matches!(
            solve_rm_cvar(&win, &betas, -0.01, &prev, &[0.1], &opts),
            Err(Error::NegativeLambda(_))
        ));
        assert!(matches!(
            solve_rm_cvar(&win, &betas, 0.01, &prev, &[0.1, 0.2], &opts),
            Err(Error::DimensionMismatch(_))
        ));
        let wrong_prev = PortfolioWeights::equal(3);
        assert!(solve_rm_cvar(&win, &betas, 0.01, &wrong_prev, &[0.1], &opts).is_err());
    }

    #[test]
    fn beta_levels_validate() {
        assert!(BetaLevels::new(vec![]).is_err());
        assert!(BetaLevels::new(vec![0.9, 0.9]).is_err());
        assert!(BetaLevels::new(vec![0.9, 0.8]).is_err());
        assert!(BetaLevels::new(vec![0.0]).is_err());
        assert!(BetaLevels::new(vec![1.0]).is_err());
        assert!(BetaLevels::new(vec![0.95, 0.99]).is_ok());
        assert_eq!(BetaLevels::default_grid().len(), 5);
    }

    #[test]
    fn sample_window_validates() {
        assert!(SampleWindow::new(0, vec![]).is_err());
        assert!(SampleWindow::new(2, vec![0.1, 0.2, 0.3]).is_err());
        assert!(SampleWindow::new(1, vec![0.1]).is_err());
        assert!(SampleWindow::new(1, vec![0.1, f64::NAN]).is_err());
        assert!(matches!(
            SampleWindow::new(1, vec![0.1, -1.0]),
            Err(Error::ReturnBelowNeg100 { .. })
        ));
        assert!(SampleWindow::new(1, vec![0.1, -0.99]).is_ok());
    }

    #[test]
    fn weights_validate_and_clean() {
        assert!(PortfolioWeights::new(vec![0.5, 0.6]).is_err());
        assert!(PortfolioWeights::new(vec![1.5, -0.5]).is_err());
        assert!(PortfolioWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(PortfolioWeights::new(vec![0.5, 0.5 - 5e-9]).is_ok());

        let cleaned = PortfolioWeights::from_solution(&[0.6, 5e-11, 0.4 - 1e-13]);
        assert_eq!(cleaned.as_slice()[1], 0.0);
        assert_eq!(cleaned.as_slice().iter().sum::<f64>(), 1.0);

        let eq = PortfolioWeights::equal(4);
        assert_relative_eq!(eq.as_slice().iter().sum::<f64>(), 1.0);
        assert_relative_eq!(
            eq.l1_distance(&PortfolioWeights::equal(4)).unwrap(),
            0.0
        );
        assert!(eq.l1_distance(&PortfolioWeights::equal(3)).is_err());
    }

    #[test]
    fn average_portfolio_of_identical_levels_matches_single() {
        let mut returns = Vec::new();
        for t in 0..20 {
            let x = t as f64;
            returns.extend_from_slice(&[0.01 * (10.0 - x) / 10.0, 0.002 * (x - 10.0).abs() / 10.0]);
        }
        let win = SampleWindow::new(2, returns).unwrap();
        let opts = SolverOptions::default();
        let betas = BetaLevels::new(vec![0.9, 0.95]).unwrap();
        let avg = average_cvar_portfolio(&win, &betas, &opts).unwrap();
        let a = solve_min_cvar(&win, 0.9, &opts).unwrap();
        let b = solve_min_cvar(&win, 0.95, &opts).unwrap();
        for i in 0..2 {
            let expected = 0.5 * (a.weights.as_slice()[i] + b.weights.as_slice()[i]);
            assert_relative_eq!(avg.as_slice()[i], expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn c_refs_are_non_decreasing() {
        let mut returns = Vec::new();
        for t in 0..40 {
            let x = (t as f64 * 0.7).sin();
            returns.extend_from_slice(&[0.03 * x, -0.02 * x + 0.001, 0.015 * (1.0 - x)]);
        }
        let win = SampleWindow::new(3, returns).unwrap();
        let betas = BetaLevels::new(vec![0.9, 0.925, 0.95]).unwrap();
        let refs = compute_c_refs(&win, &betas, &SolverOptions::default()).unwrap();
        assert_eq!(refs.len(), 3);
        assert!(refs.windows(2).all(|p| p[1] >= p[0] - 1e-8), "{refs:?}");
    }
}
