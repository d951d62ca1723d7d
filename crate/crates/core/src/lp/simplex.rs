//! Two-phase revised simplex over a standard-form conversion: finite lower
//! bounds are shifted out, free variables split, finite upper bounds become
//! extra rows, and every inequality row gets a slack. The basis inverse is
//! kept explicitly (dense, column-major) and updated per pivot; columns of
//! the constraint matrix are stored sparse because the CVaR models produce
//! rows with a handful of nonzeros each.

use super::{check_feasibility, LpProblem, LpSolution, LpStatus, SolverOptions};
use crate::error::Result;

/// Solve `problem`, classifying the outcome in `LpSolution::status`.
/// Entering variables are chosen by the most negative reduced cost with
/// smallest-index tie-breaking; after `3 * n_vars` consecutive degenerate
/// pivots the phase switches to Bland's rule for termination safety.
pub fn solve_lp(problem: &LpProblem, options: &SolverOptions) -> Result<LpSolution> {
    options.validate()?;
    if problem.n_ineq() + problem.n_eq() == 0 && !has_upper_rows(problem) {
        return Ok(solve_bounds_only(problem));
    }
    let mut t = Tableau::build(problem);
    let budget = options.iteration_budget(problem);
    let bland_after = 3 * problem.n_vars();
    let mut iterations = 0usize;

    if t.art_start < t.cols.len() && t.basis.iter().any(|&c| c >= t.art_start) {
        let phase1_cost = t.phase1_cost();
        match t.optimize(&phase1_cost, t.cols.len(), usize::MAX, options, budget, bland_after, &mut iterations) {
            LoopEnd::Optimal => {}
            LoopEnd::Unbounded | LoopEnd::IterLimit => {
                // Phase 1 is bounded below by zero, so a ratio-test dead end
                // here is numerical breakdown; report it as non-convergence.
                return Ok(failed(LpStatus::IterationLimit, iterations));
            }
        }
        let infeas: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(&c, _)| c >= t.art_start)
            .map(|(_, &v)| v.max(0.0))
            .sum();
        if infeas > options.tol_feas * (1.0 + t.b_scale) {
            return Ok(failed(LpStatus::Infeasible, iterations));
        }
        t.drive_out_artificials(options, &mut iterations);
    }

    let cost2 = t.phase2_cost.clone();
    let mut refactors = 0;
    loop {
        match t.optimize(&cost2, t.art_start, t.art_start, options, budget, bland_after, &mut iterations) {
            LoopEnd::Optimal => {}
            LoopEnd::Unbounded => {
                // A drifted inverse can hide the blocking row (every alpha
                // entry reads below the pivot tolerance). Rebuild the
                // inverse and let the verdict stand only if it repeats on
                // fresh numbers.
                if refactors < 2 && t.refactor() {
                    refactors += 1;
                    continue;
                }
                return Ok(failed(LpStatus::Unbounded, iterations));
            }
            LoopEnd::IterLimit => return Ok(failed(LpStatus::IterationLimit, iterations)),
        }
        t.refine();
        let x = t.recover(problem);
        let report = check_feasibility(problem, &x)?;
        if report.within(10.0 * options.tol_feas * (1.0 + t.b_scale)) || refactors >= 2 {
            if !report.within(10.0 * options.tol_feas * (1.0 + t.b_scale)) {
                return Ok(failed(LpStatus::IterationLimit, iterations));
            }
            let objective_value = problem
                .objective()
                .iter()
                .zip(&x)
                .map(|(c, v)| c * v)
                .sum();
            return Ok(LpSolution {
                status: LpStatus::Optimal,
                x: Some(x),
                objective_value: Some(objective_value),
                iterations,
            });
        }
        // Accumulated inverse drift: rebuild the basis inverse from scratch
        // and resume pivoting.
        refactors += 1;
        if !t.refactor() {
            return Ok(failed(LpStatus::IterationLimit, iterations));
        }
    }
}

fn failed(status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        x: None,
        objective_value: None,
        iterations,
    }
}

fn has_upper_rows(p: &LpProblem) -> bool {
    p.bounds().iter().any(|b| b.upper.is_finite())
}

/// No constraint rows at all: each variable independently sits at whichever
/// bound its cost prefers.
fn solve_bounds_only(p: &LpProblem) -> LpSolution {
    let mut x = Vec::with_capacity(p.n_vars());
    for (c, b) in p.objective().iter().zip(p.bounds()) {
        let v = if *c > 0.0 {
            b.lower
        } else if *c < 0.0 {
            b.upper
        } else if b.lower.is_finite() {
            b.lower
        } else if b.upper.is_finite() {
            b.upper
        } else {
            0.0
        };
        if !v.is_finite() {
            return failed(LpStatus::Unbounded, 0);
        }
        x.push(v);
    }
    let objective_value = p.objective().iter().zip(&x).map(|(c, v)| c * v).sum();
    LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective_value: Some(objective_value),
        iterations: 0,
    }
}

#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct Col {
    idx: Vec<u32>,
    val: Vec<f64>,
}

impl Col {
    fn dot(&self, dense: &[f64]) -> f64 {
        self.idx
            .iter()
            .zip(&self.val)
            .map(|(&i, &v)| dense[i as usize] * v)
            .sum()
    }
}

enum LoopEnd {
    Optimal,
    Unbounded,
    IterLimit,
}

struct Tableau {
    m: usize,
    cols: Vec<Col>,
    phase2_cost: Vec<f64>,
    b: Vec<f64>,
    b_scale: f64,
    art_start: usize,
    maps: Vec<VarMap>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Dense m x m basis inverse, column-major: entry (i, k) at `k * m + i`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    alpha: Vec<f64>,
}

impl Tableau {
    fn build(p: &LpProblem) -> Tableau {
        let n = p.n_vars();
        let mut maps = Vec::with_capacity(n);
        let mut n_y = 0usize;
        for b in p.bounds() {
            if b.lower.is_finite() {
                maps.push(VarMap::Shift {
                    col: n_y,
                    lower: b.lower,
                });
                n_y += 1;
            } else {
                maps.push(VarMap::Split {
                    pos: n_y,
                    neg: n_y + 1,
                });
                n_y += 2;
            }
        }

        // Assemble rows in standardized y-space: original inequalities,
        // upper-bound rows, then equalities.
        struct Row {
            entries: Vec<(usize, f64)>,
            rhs: f64,
            is_eq: bool,
        }
        let transform = |coeffs: &[f64], rhs: f64, is_eq: bool| -> Row {
            let mut entries = Vec::new();
            let mut rhs = rhs;
            for (j, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match maps[j] {
                    VarMap::Shift { col, lower } => {
                        entries.push((col, a));
                        rhs -= a * lower;
                    }
                    VarMap::Split { pos, neg } => {
                        entries.push((pos, a));
                        entries.push((neg, -a));
                    }
                }
            }
            Row {
                entries,
                rhs,
                is_eq,
            }
        };

        let mut rows = Vec::new();
        for i in 0..p.n_ineq() {
            let (row, rhs) = p.ineq_row(i);
            rows.push(transform(row, rhs, false));
        }
        for (j, b) in p.bounds().iter().enumerate() {
            if b.upper.is_finite() {
                match maps[j] {
                    VarMap::Shift { col, lower } => rows.push(Row {
                        entries: vec![(col, 1.0)],
                        rhs: b.upper - lower,
                        is_eq: false,
                    }),
                    VarMap::Split { pos, neg } => rows.push(Row {
                        entries: vec![(pos, 1.0), (neg, -1.0)],
                        rhs: b.upper,
                        is_eq: false,
                    }),
                }
            }
        }
        for i in 0..p.n_eq() {
            let (row, rhs) = p.eq_row(i);
            rows.push(transform(row, rhs, true));
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|r| !r.is_eq).count();
        let mut cols: Vec<Col> = (0..n_y)
            .map(|_| Col {
                idx: Vec::new(),
                val: Vec::new(),
            })
            .collect();
        let mut b = Vec::with_capacity(m);
        let mut slack_sign = Vec::with_capacity(m);
        for (r, row) in rows.iter().enumerate() {
            let flip = row.rhs < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            for &(c, v) in &row.entries {
                cols[c].idx.push(r as u32);
                cols[c].val.push(s * v);
            }
            b.push(s * row.rhs);
            slack_sign.push(if row.is_eq { 0.0 } else { s });
        }

        let mut phase2_cost = vec![0.0; n_y];
        for (j, &c) in p.objective().iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, .. } => phase2_cost[col] = c,
                VarMap::Split { pos, neg } => {
                    phase2_cost[pos] = c;
                    phase2_cost[neg] = -c;
                }
            }
        }

        // Slack columns, then artificials for rows whose slack was flipped
        // (or that are equalities). Unflipped slacks seed the basis.
        let mut basis = vec![usize::MAX; m];
        for r in 0..m {
            if slack_sign[r] != 0.0 {
                let j = cols.len();
                cols.push(Col {
                    idx: vec![r as u32],
                    val: vec![slack_sign[r]],
                });
                phase2_cost.push(0.0);
                if slack_sign[r] > 0.0 {
                    basis[r] = j;
                }
            }
        }
        debug_assert_eq!(cols.len(), n_y + n_slack);
        let art_start = cols.len();
        for (r, slot) in basis.iter_mut().enumerate() {
            if *slot == usize::MAX {
                let j = cols.len();
                cols.push(Col {
                    idx: vec![r as u32],
                    val: vec![1.0],
                });
                phase2_cost.push(0.0);
                *slot = j;
            }
        }

        let mut in_basis = vec![false; cols.len()];
        for &c in &basis {
            in_basis[c] = true;
        }
        let mut binv = vec![0.0; m * m];
        for k in 0..m {
            binv[k * m + k] = 1.0;
        }
        let b_scale = b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        Tableau {
            m,
            xb: b.clone(),
            cols,
            phase2_cost,
            b,
            b_scale,
            art_start,
            maps,
            basis,
            in_basis,
            binv,
            alpha: vec![0.0; m],
        }
    }

    fn phase1_cost(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.cols.len()];
        for v in &mut c[self.art_start..] {
            *v = 1.0;
        }
        c
    }

    /// Price-and-pivot loop for one phase. Columns at index >= `bar_start`
    /// never enter; basic columns at index >= `pin_start` are held at zero
    /// by the ratio test (used for leftover artificials in phase 2).
    #[allow(clippy::too_many_arguments)]
    fn optimize(
        &mut self,
        cost: &[f64],
        bar_start: usize,
        pin_start: usize,
        options: &SolverOptions,
        budget: usize,
        bland_after: usize,
        iterations: &mut usize,
    ) -> LoopEnd {
        let m = self.m;
        let cost_scale = cost.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let enter_tol = options.tol_pivot.max(1e-12) * (1.0 + cost_scale);
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let mut y = vec![0.0; m];
        loop {
            if *iterations >= budget {
                return LoopEnd::IterLimit;
            }

            // y = c_B^T B^{-1}; only rows whose basic variable has nonzero
            // cost contribute.
            y.fill(0.0);
            for (r, &bc) in self.basis.iter().enumerate() {
                let c = cost[bc];
                if c != 0.0 {
                    for (k, yk) in y.iter_mut().enumerate() {
                        *yk += c * self.binv[k * m + r];
                    }
                }
            }

            let mut entering = None;
            let mut best = -enter_tol;
            for (j, col) in self.cols.iter().enumerate().take(bar_start) {
                if self.in_basis[j] {
                    continue;
                }
                let d = cost[j] - col.dot(&y);
                if d < best {
                    best = d;
                    entering = Some(j);
                    if bland {
                        break;
                    }
                }
            }
            let q = match entering {
                Some(q) => q,
                None => return LoopEnd::Optimal,
            };

            // alpha = B^{-1} a_q via the stored inverse columns.
            self.alpha.fill(0.0);
            for (&i, &v) in self.cols[q].idx.iter().zip(&self.cols[q].val) {
                let col = &self.binv[(i as usize) * m..(i as usize + 1) * m];
                for (a, &bi) in self.alpha.iter_mut().zip(col) {
                    *a += v * bi;
                }
            }

            let feas_slack = options.tol_feas * (1.0 + self.b_scale);
            let leave = self.ratio_test(pin_start, options.tol_pivot, feas_slack, bland);
            let r = match leave {
                Some(r) => r,
                None => return LoopEnd::Unbounded,
            };

            let theta = {
                let a = self.alpha[r];
                let t = if a > 0.0 {
                    self.xb[r].max(0.0) / a
                } else {
                    (-self.xb[r]).max(0.0) / -a
                };
                t.max(0.0)
            };
            if theta <= options.tol_pivot {
                degenerate_run += 1;
                if degenerate_run >= bland_after {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }

            for i in 0..m {
                if i != r {
                    self.xb[i] -= theta * self.alpha[i];
                }
            }
            self.xb[r] = theta;

            let piv = self.alpha[r];
            for k in 0..m {
                let base = k * m;
                let v = self.binv[base + r] / piv;
                if v != 0.0 {
                    for (slot, &a) in self.binv[base..base + m].iter_mut().zip(&self.alpha) {
                        *slot -= a * v;
                    }
                }
                self.binv[base + r] = v;
            }

            self.in_basis[self.basis[r]] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            *iterations += 1;
        }
    }

    /// Pick the leaving row for the current `alpha`. Rows limit the step when
    /// their basic variable would drop below zero, or (for pinned columns)
    /// rise above zero.
    ///
    /// Two-pass Harris test: pass 1 finds the tightest bound after granting
    /// every row `feas_slack` of headroom, pass 2 picks the largest pivot
    /// whose strict ratio fits under that bound. Taking the minimum-ratio row
    /// unconditionally can force a pivot barely above the tolerance, and one
    /// such pivot leaves the basis near-singular for the rest of the solve.
    /// Rows within half the best pivot magnitude prefer kicking artificials
    /// out. Under Bland's rule the strict minimum ratio with smallest basic
    /// column index is kept for its termination guarantee.
    fn ratio_test(
        &self,
        pin_start: usize,
        min_pivot: f64,
        feas_slack: f64,
        bland: bool,
    ) -> Option<usize> {
        let eligible = |r: usize| -> Option<(f64, f64)> {
            let a = self.alpha[r];
            if a > min_pivot {
                Some((self.xb[r].max(0.0), a))
            } else if a < -min_pivot && self.basis[r] >= pin_start {
                Some(((-self.xb[r]).max(0.0), -a))
            } else {
                None
            }
        };

        if bland {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let Some((base, aabs)) = eligible(r) else {
                    continue;
                };
                let ratio = base / aabs;
                let better = match best {
                    None => true,
                    Some((br, bratio)) => {
                        let tie = ratio <= bratio * (1.0 + 1e-9) + 1e-15
                            && bratio <= ratio * (1.0 + 1e-9) + 1e-15;
                        if tie {
                            self.basis[r] < self.basis[br]
                        } else {
                            ratio < bratio
                        }
                    }
                };
                if better {
                    best = Some((r, best.map_or(ratio, |(_, b)| ratio.min(b))));
                }
            }
            return best.map(|(r, _)| r);
        }

        let mut t_max = f64::INFINITY;
        let mut seen = false;
        for r in 0..self.m {
            if let Some((base, aabs)) = eligible(r) {
                seen = true;
                t_max = t_max.min((base + feas_slack) / aabs);
            }
        }
        if !seen {
            return None;
        }

        let mut amax = 0.0f64;
        for r in 0..self.m {
            if let Some((base, aabs)) = eligible(r) {
                if base / aabs <= t_max {
                    amax = amax.max(aabs);
                }
            }
        }

        let mut pick: Option<(usize, bool, f64)> = None; // (row, kicks artificial, |pivot|)
        for r in 0..self.m {
            let Some((base, aabs)) = eligible(r) else {
                continue;
            };
            if base / aabs > t_max || aabs < 0.5 * amax {
                continue;
            }
            let is_art = self.basis[r] >= self.art_start;
            let better = match pick {
                None => true,
                Some((_, p_art, p_abs)) => {
                    if is_art != p_art {
                        is_art
                    } else {
                        aabs > p_abs
                    }
                }
            };
            if better {
                pick = Some((r, is_art, aabs));
            }
        }
        pick.map(|(r, _, _)| r)
    }

    /// After phase 1, pivot leftover artificials out of the basis where a
    /// structural or slack column can replace them. Rows where none can are
    /// redundant; their artificials stay basic at zero and phase 2 pins them.
    fn drive_out_artificials(&mut self, options: &SolverOptions, iterations: &mut usize) {
        let m = self.m;
        let mut row_of_binv = vec![0.0; m];
        for r in 0..m {
            if self.basis[r] < self.art_start {
                continue;
            }
            for (k, slot) in row_of_binv.iter_mut().enumerate() {
                *slot = self.binv[k * m + r];
            }
            let mut pick: Option<(usize, f64)> = None;
            for j in 0..self.art_start {
                if self.in_basis[j] {
                    continue;
                }
                let v = self.cols[j].dot(&row_of_binv);
                if v.abs() > options.tol_pivot && pick.map_or(true, |(_, pv)| v.abs() > pv.abs()) {
                    pick = Some((j, v));
                }
            }
            let Some((q, _)) = pick else { continue };

            self.alpha.fill(0.0);
            for (&i, &v) in self.cols[q].idx.iter().zip(&self.cols[q].val) {
                let col = &self.binv[(i as usize) * m..(i as usize + 1) * m];
                for (a, &bi) in self.alpha.iter_mut().zip(col) {
                    *a += v * bi;
                }
            }
            let piv = self.alpha[r];
            let theta = self.xb[r] / piv;
            for i in 0..m {
                if i != r {
                    self.xb[i] -= theta * self.alpha[i];
                }
            }
            self.xb[r] = theta;
            for k in 0..m {
                let base = k * m;
                let v = self.binv[base + r] / piv;
                if v != 0.0 {
                    for (slot, &a) in self.binv[base..base + m].iter_mut().zip(&self.alpha) {
                        *slot -= a * v;
                    }
                }
                self.binv[base + r] = v;
            }
            self.in_basis[self.basis[r]] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            *iterations += 1;
        }
    }

    /// One step of iterative refinement on the basic values.
    fn refine(&mut self) {
        let m = self.m;
        let mut res = self.b.clone();
        for (r, &bc) in self.basis.iter().enumerate() {
            let x = self.xb[r];
            if x != 0.0 {
                for (&i, &v) in self.cols[bc].idx.iter().zip(&self.cols[bc].val) {
                    res[i as usize] -= v * x;
                }
            }
        }
        for (k, &rk) in res.iter().enumerate() {
            if rk != 0.0 {
                let col = &self.binv[k * m..(k + 1) * m];
                for (x, &bi) in self.xb.iter_mut().zip(col) {
                    *x += rk * bi;
                }
            }
        }
    }

    /// Rebuild the basis inverse from scratch (Gauss-Jordan with partial
    /// pivoting, row-major workspace). Returns false if the recorded basis
    /// is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m]; // row-major copy of B
        let mut inv = vec![0.0; m * m]; // row-major identity
        for (c, &bc) in self.basis.iter().enumerate() {
            for (&i, &v) in self.cols[bc].idx.iter().zip(&self.cols[bc].val) {
                a[(i as usize) * m + c] = v;
            }
        }
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val <= f64::MIN_POSITIVE {
                return false;
            }
            if piv_row != col {
                for k in 0..m {
                    a.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let piv = a[col * m + col];
            let inv_piv = 1.0 / piv;
            for k in 0..m {
                a[col * m + k] *= inv_piv;
                inv[col * m + k] *= inv_piv;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        // Transpose into the column-major layout the solver uses.
        for i in 0..m {
            for k in 0..m {
                self.binv[k * m + i] = inv[i * m + k];
            }
        }
        self.xb.fill(0.0);
        for k in 0..m {
            let bk = self.b[k];
            if bk != 0.0 {
                let col = &self.binv[k * m..(k + 1) * m];
                for (x, &bi) in self.xb.iter_mut().zip(col) {
                    *x += bk * bi;
                }
            }
        }
        true
    }

    /// Map basic values back to the caller's variable space.
    fn recover(&self, p: &LpProblem) -> Vec<f64> {
        let mut y = vec![0.0; self.art_start];
        for (r, &bc) in self.basis.iter().enumerate() {
            if bc < self.art_start {
                y[bc] = self.xb[r];
            }
        }
        let mut x = Vec::with_capacity(p.n_vars());
        for map in &self.maps {
            x.push(match *map {
                VarMap::Shift { col, lower } => lower + y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            });
        }
        x
    }
}
