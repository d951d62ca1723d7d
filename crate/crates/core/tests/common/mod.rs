//! Independent oracles and instance generators shared by the integration
//! and acceptance suites. Everything here recomputes results from first
//! principles so library bugs cannot hide behind their own code paths.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rmcvar::cvar::{PortfolioWeights, SampleWindow};
use rmcvar::lp::{check_feasibility, LpProblem};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense Gaussian elimination with partial pivoting and one refinement
/// step. `a` is row-major n x n. None when a pivot collapses.
pub fn gauss_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |s, &v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let solve_once = |rhs: &[f64]| -> Option<Vec<f64>> {
        let mut m = a.to_vec();
        let mut x = rhs.to_vec();
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))
                .unwrap();
            if m[pivot_row * n + col].abs() <= 1e-12 * scale {
                return None;
            }
            if pivot_row != col {
                for k in 0..n {
                    m.swap(col * n + k, pivot_row * n + k);
                }
                x.swap(col, pivot_row);
            }
            let piv = m[col * n + col];
            for r in col + 1..n {
                let f = m[r * n + col] / piv;
                if f == 0.0 {
                    continue;
                }
                for k in col..n {
                    m[r * n + k] -= f * m[col * n + k];
                }
                x[r] -= f * x[col];
            }
        }
        for col in (0..n).rev() {
            let mut v = x[col];
            for k in col + 1..n {
                v -= m[col * n + k] * x[k];
            }
            x[col] = v / m[col * n + col];
        }
        Some(x)
    };

    let mut x = solve_once(b)?;
    // Residual correction recovers accuracy on mildly ill-conditioned
    // active sets, which matter because they can carry the optimum.
    let mut residual = vec![0.0; n];
    for r in 0..n {
        residual[r] = b[r] - dot(&a[r * n..(r + 1) * n], &x);
    }
    if let Some(d) = solve_once(&residual) {
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
    }
    Some(x)
}

/// Visit every k-subset of 0..n in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleVerdict {
    Optimal(f64),
    Infeasible,
}

/// Brute-force LP minimum by enumerating candidate vertices: every choice
/// of active rows (equalities always included, inequalities and finite
/// bounds optional) that pins all variables. Assumes a bounded feasible
/// region, which the generators guarantee with box bounds.
pub fn vertex_oracle(p: &LpProblem, feas_tol: f64) -> OracleVerdict {
    let n = p.n_vars();
    let mut fixed: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..p.n_eq() {
        let (a, b) = p.eq_row(i);
        fixed.push((a.to_vec(), b));
    }
    let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..p.n_ineq() {
        let (a, b) = p.ineq_row(i);
        cands.push((a.to_vec(), b));
    }
    for (v, bd) in p.bounds().iter().enumerate() {
        for value in [bd.lower, bd.upper] {
            if value.is_finite() {
                let mut unit = vec![0.0; n];
                unit[v] = 1.0;
                cands.push((unit, value));
            }
        }
    }
    assert!(fixed.len() <= n, "oracle expects at most n equality rows");
    let need = n - fixed.len();

    let mut best: Option<f64> = None;
    for_each_combination(cands.len(), need, &mut |combo| {
        let mut a = Vec::with_capacity(n * n);
        let mut b = Vec::with_capacity(n);
        for (row, rhs) in &fixed {
            a.extend_from_slice(row);
            b.push(*rhs);
        }
        for &ci in combo {
            a.extend_from_slice(&cands[ci].0);
            b.push(cands[ci].1);
        }
        if let Some(x) = gauss_solve(&a, &b, n) {
            let report = check_feasibility(p, &x).expect("dimensions match");
            if report.max_violation() <= feas_tol {
                let obj = dot(p.objective(), &x);
                best = Some(best.map_or(obj, |cur: f64| cur.min(obj)));
            }
        }
    });
    match best {
        Some(obj) => OracleVerdict::Optimal(obj),
        None => OracleVerdict::Infeasible,
    }
}

/// Random bounded LP: box bounds on every variable, a mix of inequalities
/// anchored around an interior point (some deliberately cutting it off),
/// and occasionally one equality through the anchor.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=6);
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut p = LpProblem::new(objective).unwrap();
    let mut anchor = Vec::with_capacity(n);
    for v in 0..n {
        let upper = rng.gen_range(0.5..2.5);
        p.set_bounds(v, 0.0, upper).unwrap();
        anchor.push(rng.gen_range(0.0..upper));
    }
    let rows = rng.gen_range(0..=7);
    for _ in 0..rows {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let at_anchor = dot(&a, &anchor);
        let rhs = if rng.gen_bool(0.75) {
            at_anchor + rng.gen_range(0.0..1.0)
        } else {
            at_anchor - rng.gen_range(0.1..1.0)
        };
        p.add_ineq(&a, rhs).unwrap();
    }
    if rng.gen_bool(0.3) {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs = dot(&a, &anchor);
        p.add_eq(&a, rhs).unwrap();
    }
    p
}

/// CVaR of a fixed portfolio by direct scan: evaluate the hinge objective
/// at every sample-loss threshold and keep the smallest. Independent of
/// the library's sorted closed form.
pub fn scan_cvar(weights: &[f64], window: &SampleWindow, beta: f64) -> f64 {
    let q = window.n_periods();
    let m = q as f64 * (1.0 - beta);
    let losses: Vec<f64> = (0..q).map(|t| -dot(weights, window.period(t))).collect();
    losses
        .iter()
        .map(|&alpha| {
            alpha + losses.iter().map(|&l| (l - alpha).max(0.0)).sum::<f64>() / m
        })
        .fold(f64::INFINITY, f64::min)
}

/// Brute-force minimum CVaR over the long-only simplex on a grid with the
/// given number of steps per axis. Only small asset counts are tractable.
pub fn grid_min_cvar(window: &SampleWindow, beta: f64, steps: usize) -> f64 {
    let n = window.n_assets();
    let s = steps as f64;
    let mut best = f64::INFINITY;
    let mut eval = |w: &[f64]| {
        let v = scan_cvar(w, window, beta);
        if v < best {
            best = v;
        }
    };
    match n {
        1 => eval(&[1.0]),
        2 => {
            for i in 0..=steps {
                eval(&[i as f64 / s, (steps - i) as f64 / s]);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    eval(&[i as f64 / s, j as f64 / s, (steps - i - j) as f64 / s]);
                }
            }
        }
        _ => panic!("grid oracle only covers up to three assets"),
    }
    best
}

/// Largest absolute return in the window; the Lipschitz constant of CVaR
/// in the portfolio under the L1 norm.
pub fn max_abs_return(window: &SampleWindow) -> f64 {
    (0..window.n_periods())
        .flat_map(|t| window.period(t).iter().copied())
        .fold(0.0f64, |m, r| m.max(r.abs()))
}

pub fn random_window(rng: &mut ChaCha8Rng, n: usize, q: usize) -> SampleWindow {
    let returns: Vec<f64> = (0..n * q).map(|_| rng.gen_range(-0.12..0.10)).collect();
    SampleWindow::new(n, returns).unwrap()
}

pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> PortfolioWeights {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    PortfolioWeights::from_solution(&raw)
}

pub fn random_returns_matrix(
    rng: &mut ChaCha8Rng,
    n: usize,
    t: usize,
    first: &str,
) -> rmcvar::ReturnsMatrix {
    let mut period: rmcvar::Period = first.parse().unwrap();
    let mut periods = Vec::with_capacity(t);
    for _ in 0..t {
        periods.push(period);
        period = period.succ();
    }
    let names = (0..n).map(|i| format!("A{i:02}")).collect();
    let values = (0..n * t).map(|_| rng.gen_range(-0.12..0.10)).collect();
    rmcvar::ReturnsMatrix::new(names, periods, values).unwrap()
}
