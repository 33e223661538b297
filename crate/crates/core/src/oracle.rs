//! Reference solvers for small instances.
//!
//! Both work directly on the primal problem `min { Ψ(x) : A x = y }` and
//! share no code with the dual ascent: the grid search enumerates the box,
//! and the penalty method runs Newton descent on `Ψ(x) + w ‖A x - y‖²` in
//! `x`-space with its own entropy terms and its own linear solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::problem::InverseProblem;

/// Largest dimension accepted by [`brute_force_solve`].
pub const MAX_GRID_DIMENSION: usize = 6;
/// Largest per-coordinate resolution accepted by [`brute_force_solve`].
pub const MAX_GRID_POINTS: usize = 200;
/// Penalty weights used when the caller has no preference.
pub const DEFAULT_PENALTY_SCHEDULE: [f64; 5] = [1.0, 1e2, 1e4, 1e6, 1e8];

/// Best point found by an oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// The minimizer found.
    pub best_point: Vec<f64>,
    /// `Ψ(best_point)`.
    pub best_value: f64,
    /// Largest grid spacing over the coordinates; zero for the penalty oracle.
    pub grid_step: f64,
    /// Grid search: the tolerance used. Penalty method: the residual reached.
    pub feasibility_tolerance: f64,
    /// Number of grid points that passed the feasibility test.
    pub feasible_points: usize,
}

fn entropy_term(x: f64, a: f64, b: f64) -> f64 {
    let d = b - a;
    if d == 0.0 {
        return 0.0;
    }
    let f = |p: f64| if p <= 0.0 { 0.0 } else { p * math::ln(p) };
    f((x - a) / d) + f((b - x) / d)
}

fn potential(x: &[f64], problem: &InverseProblem) -> f64 {
    let dom = problem.domain();
    x.iter()
        .enumerate()
        .map(|(j, &v)| entropy_term(v, dom.lower()[j], dom.upper()[j]))
        .sum()
}

struct Grid<'a> {
    problem: &'a InverseProblem,
    values: Vec<Vec<f64>>,
    terms: Vec<Vec<f64>>,
    /// `reach[d][i]`: range of `Σ_{j ≥ d} A_ij x_j` over the box.
    reach: Vec<Vec<(f64, f64)>>,
    tol: f64,
    best: Option<(f64, Vec<usize>)>,
    feasible: usize,
}

impl Grid<'_> {
    /// `levels[d]` holds `Σ_{j < d} A_ij x_j` for the current branch.
    fn search(&mut self, depth: usize, levels: &mut [Vec<f64>], potential: f64, idx: &mut Vec<usize>) {
        let y = self.problem.data();
        let reachable = self.reach[depth]
            .iter()
            .zip(levels[depth].iter().zip(y))
            .all(|(&(lo, hi), (&s, &yi))| s + lo <= yi + self.tol && yi - self.tol <= s + hi);
        if !reachable {
            return;
        }
        let n = self.values.len();
        if depth == n {
            self.feasible += 1;
            // strict comparison keeps the lexicographically first minimizer
            if self.best.as_ref().map_or(true, |(v, _)| potential < *v) {
                self.best = Some((potential, idx.clone()));
            }
            return;
        }
        let a = self.problem.matrix();
        for k in 0..self.values[depth].len() {
            let v = self.values[depth][k];
            let (done, rest) = levels.split_at_mut(depth + 1);
            for (i, s) in rest[0].iter_mut().enumerate() {
                *s = done[depth][i] + a[(i, depth)] * v;
            }
            idx.push(k);
            let t = self.terms[depth][k];
            self.search(depth + 1, levels, potential + t, idx);
            idx.pop();
        }
    }
}

/// Enumerates the regular grid with `grid_points_per_dim` points per
/// coordinate (endpoints included), keeps points with
/// `‖A x - y‖_∞ ≤ feasibility_tolerance`, and returns the one with the
/// smallest `Ψ`. Ties go to the lexicographically first grid index.
///
/// Branches that cannot reach `y` within the tolerance are pruned using the
/// range of the remaining coordinates, which changes the cost but not the
/// result.
pub fn brute_force_solve(
    problem: &InverseProblem,
    grid_points_per_dim: usize,
    feasibility_tolerance: f64,
) -> Result<OracleResult> {
    let n = problem.unknowns();
    if n > MAX_GRID_DIMENSION || grid_points_per_dim > MAX_GRID_POINTS {
        return Err(Error::TooLarge { dimension: n, grid_points: grid_points_per_dim });
    }
    if grid_points_per_dim < 2 {
        return Err(Error::InvalidOptions("grid needs at least 2 points per coordinate"));
    }
    if !(feasibility_tolerance >= 0.0) {
        return Err(Error::InvalidOptions("feasibility tolerance must be nonnegative"));
    }
    let dom = problem.domain();
    let steps = grid_points_per_dim - 1;
    let mut values = Vec::with_capacity(n);
    let mut terms = Vec::with_capacity(n);
    let mut grid_step: f64 = 0.0;
    for j in 0..n {
        let (a, b) = (dom.lower()[j], dom.upper()[j]);
        let h = (b - a) / steps as f64;
        grid_step = grid_step.max(h);
        let vals: Vec<f64> = if a == b {
            vec![a]
        } else {
            (0..=steps).map(|k| if k == steps { b } else { a + k as f64 * h }).collect()
        };
        terms.push(vals.iter().map(|&v| entropy_term(v, a, b)).collect());
        values.push(vals);
    }

    let m = problem.equations();
    let a = problem.matrix();
    let mut reach = vec![vec![(0.0, 0.0); m]; n + 1];
    for d in (0..n).rev() {
        for i in 0..m {
            let (p, q) = (a[(i, d)] * dom.lower()[d], a[(i, d)] * dom.upper()[d]);
            let (lo, hi) = reach[d + 1][i];
            reach[d][i] = (lo + p.min(q), hi + p.max(q));
        }
    }

    let mut grid = Grid {
        problem,
        values,
        terms,
        reach,
        tol: feasibility_tolerance,
        best: None,
        feasible: 0,
    };
    grid.search(0, &mut vec![vec![0.0; m]; n + 1], 0.0, &mut Vec::with_capacity(n));

    let (_, idx) = grid
        .best
        .take()
        .ok_or(Error::NoFeasibleGridPoint { tolerance: feasibility_tolerance })?;
    let best_point: Vec<f64> = idx.iter().enumerate().map(|(j, &k)| grid.values[j][k]).collect();
    Ok(OracleResult {
        best_value: potential(&best_point, problem),
        best_point,
        grid_step,
        feasibility_tolerance,
        feasible_points: grid.feasible,
    })
}

/// Gaussian elimination with partial pivoting on a row-major `n×n` system.
fn gauss_solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[pivot * n + col] == 0.0 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Some(b)
}

/// Penalized objective `Ψ(x) + w ‖A x - y‖²`.
fn penalized(x: &[f64], problem: &InverseProblem, w: f64) -> f64 {
    let r = problem.residual_vector(x);
    potential(x, problem) + w * r.iter().map(|v| v * v).sum::<f64>()
}

/// Minimizes `Ψ(x) + w ‖A x - y‖²` for each weight of the schedule in
/// turn, warm-starting from the previous stage, with up to `iterations`
/// damped Newton steps per stage. Steps are shortened to stay inside the
/// open box.
pub fn penalty_descent_solve(
    problem: &InverseProblem,
    penalty_weight_schedule: &[f64],
    iterations: usize,
) -> Result<OracleResult> {
    let Some(&last_weight) = penalty_weight_schedule.last() else {
        return Err(Error::InvalidOptions("empty penalty schedule"));
    };
    if penalty_weight_schedule.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidOptions("penalty weights must be positive"));
    }
    let dom = problem.domain();
    let a = problem.matrix();
    let free: Vec<usize> = (0..problem.unknowns()).filter(|&j| !dom.is_degenerate(j)).collect();
    let nf = free.len();
    let mut x = dom.midpoint();

    for &w in penalty_weight_schedule {
        let mut settled = false;
        for _ in 0..iterations {
            let r = problem.residual_vector(&x);
            let mut grad = vec![0.0; nf];
            let mut hess = vec![0.0; nf * nf];
            for (p, &j) in free.iter().enumerate() {
                let (lo, hi) = (dom.lower()[j], dom.upper()[j]);
                let d = hi - lo;
                let (u, v) = (x[j] - lo, hi - x[j]);
                grad[p] = math::ln(u / v) / d + 2.0 * w * (0..r.len()).map(|i| a[(i, j)] * r[i]).sum::<f64>();
                hess[p * nf + p] = 1.0 / (u * v);
                for (q, &k) in free.iter().enumerate() {
                    hess[p * nf + q] += 2.0 * w * (0..r.len()).map(|i| a[(i, j)] * a[(i, k)]).sum::<f64>();
                }
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(dir) = gauss_solve(hess, rhs) else {
                break;
            };
            let rel_step = free
                .iter()
                .zip(&dir)
                .fold(0.0f64, |m, (&j, d)| m.max(d.abs() / dom.widths()[j]));
            let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();

            let f0 = penalized(&x, problem, w);
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..80 {
                let mut trial = x.clone();
                for (&j, d) in free.iter().zip(&dir) {
                    trial[j] += t * d;
                }
                let inside = free.iter().all(|&j| dom.lower()[j] < trial[j] && trial[j] < dom.upper()[j]);
                if inside && penalized(&trial, problem, w) <= f0 + 1e-4 * t * slope {
                    x = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if rel_step <= 1e-9 || (!moved && rel_step <= 1e-6) {
                settled = true;
                break;
            }
            if !moved {
                break;
            }
        }
        if !settled && w == last_weight {
            return Err(Error::NotConvergedOracle { weight: w });
        }
    }

    Ok(OracleResult {
        best_value: potential(&x, problem),
        feasibility_tolerance: problem.residual(&x),
        best_point: x,
        grid_step: 0.0,
        feasible_points: 0,
    })
}
