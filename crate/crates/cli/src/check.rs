//! Invariant suite behind `boxdual check`.
//!
//! Everything is evaluated on the free coordinates; zero-width coordinates
//! are pinned and carry no entropy.

use boxdual::entropy::{
    bregman_divergence, divergence_lower_bound, divergence_upper_bound, dual_potential, log_mgf, mean_map,
};
use boxdual::linalg::norm_inf;
use boxdual::oracle::{brute_force_solve, penalty_descent_solve, DEFAULT_PENALTY_SCHEDULE};
use boxdual::{Error, InverseProblem, SensitivityReport, Solution};

/// Largest free dimension sent to the penalty oracle.
pub const PENALTY_LIMIT: usize = 200;
/// Largest free dimension sent to the grid oracle.
pub const GRID_LIMIT: usize = 4;
/// Grid resolution of the grid oracle.
pub const GRID_POINTS: usize = 100;

/// One line of the suite. `passed` is `None` when the check was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    /// Short name.
    pub name: &'static str,
    /// Outcome.
    pub passed: Option<bool>,
    /// Measured quantities.
    pub detail: String,
}

impl CheckLine {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed: Some(passed),
            detail,
        }
    }

    fn skipped(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: None,
            detail,
        }
    }
}

/// Runs every check that applies to `problem` at its converged `solution`.
pub fn run_checks(problem: &InverseProblem, solution: &Solution) -> Vec<CheckLine> {
    let reduced = problem.reduce();
    let free = &reduced.free;
    let rp = &reduced.problem;
    let dom = rp.domain();
    let x: Vec<f64> = free.iter().map(|&j| solution.primal[j]).collect();
    let tau: Vec<f64> = free.iter().map(|&j| solution.dual_coords[j]).collect();
    let mut lines = Vec::new();

    lines.push(CheckLine::new(
        "feasibility",
        solution.residual <= 1e-8,
        format!("residual {:.3e} (limit 1e-8)", solution.residual),
    ));
    lines.push(CheckLine::new(
        "duality gap",
        solution.gap <= 1e-8,
        format!("gap {:.3e} (limit 1e-8)", solution.gap),
    ));
    let margin = (0..x.len())
        .map(|k| (x[k] - dom.lower()[k]).min(dom.upper()[k] - x[k]))
        .fold(f64::INFINITY, f64::min);
    lines.push(CheckLine::new(
        "interiority",
        x.is_empty() || margin > 1e-12,
        format!("smallest distance to a face {margin:.3e}"),
    ));

    if x.is_empty() {
        lines.push(CheckLine::skipped("Fenchel-Young", "every coordinate is pinned".into()));
    } else {
        let mx = mean_map(&tau, dom).unwrap_or_default();
        let psi = dual_potential(&mx, dom).unwrap_or(f64::NAN);
        let m = log_mgf(&tau, dom).unwrap_or(f64::NAN);
        let inner: f64 = tau.iter().zip(&mx).map(|(t, v)| t * v).sum();
        let scale = psi.abs().max(m.abs()).max(inner.abs()).max(1.0);
        let err = (psi + m - inner).abs() / scale;
        lines.push(CheckLine::new(
            "Fenchel-Young",
            err <= 1e-10,
            format!("relative defect {err:.3e} at τ*"),
        ));

        let mid = dom.midpoint();
        let sandwich = |xi: &[f64], eta: &[f64]| -> Option<f64> {
            let d = bregman_divergence(xi, eta, dom).ok()?;
            let lo = divergence_lower_bound(xi, eta, dom).ok()?;
            let hi = divergence_upper_bound(xi, eta, dom).ok()?;
            Some((lo - d).max(d - hi).max(0.0))
        };
        match (sandwich(&x, &mid), sandwich(&mid, &x)) {
            (Some(a), Some(b)) => lines.push(CheckLine::new(
                "divergence sandwich",
                a.max(b) <= 1e-12,
                format!("largest violation {:.3e} between x* and the midpoint", a.max(b)),
            )),
            _ => lines.push(CheckLine::skipped("divergence sandwich", "x* is not strictly interior".into())),
        }
    }

    match SensitivityReport::compute(solution, problem) {
        Ok(r) => {
            let ax = problem.matrix().mul(&r.primal_jacobian).expect("shapes agree");
            let m = ax.rows();
            let defect = (0..m)
                .flat_map(|i| (0..m).map(move |k| (i, k)))
                .map(|(i, k)| (ax[(i, k)] - if i == k { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            let asym = r.multiplier_jacobian.asymmetry();
            lines.push(CheckLine::new(
                "sensitivity",
                defect <= 1e-8 && asym <= 1e-10,
                format!("|A·∂x/∂y - I| {defect:.3e}, asymmetry {asym:.3e}"),
            ));
        }
        Err(Error::SingularNormalMatrix { condition }) => lines.push(CheckLine::skipped(
            "sensitivity",
            format!("unavailable, condition estimate {condition:.3e}"),
        )),
        Err(e) => lines.push(CheckLine::new("sensitivity", false, e.to_string())),
    }

    if free.len() <= PENALTY_LIMIT {
        match penalty_descent_solve(problem, &DEFAULT_PENALTY_SCHEDULE, 200) {
            Ok(pen) => {
                let dist = solution
                    .primal
                    .iter()
                    .zip(&pen.best_point)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                lines.push(CheckLine::new(
                    "penalty oracle",
                    dist <= 1e-4,
                    format!("distance {dist:.3e} (limit 1e-4)"),
                ));
            }
            Err(e) => lines.push(CheckLine::new("penalty oracle", false, e.to_string())),
        }
    } else {
        lines.push(CheckLine::skipped("penalty oracle", format!("more than {PENALTY_LIMIT} free unknowns")));
    }

    // A grid point z with |Az - y| ≤ t satisfies Ψ(z) ≥ Ψ(x*) - ‖λ*‖₁ t by
    // convexity, since ∇Ψ(x*) = Aᵀλ*.
    if (1..=GRID_LIMIT).contains(&free.len()) {
        let a = rp.matrix();
        let row_norm = (0..a.rows())
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let step = dom.widths().iter().fold(0.0f64, |m, &d| m.max(d)) / (GRID_POINTS - 1) as f64;
        let tol = row_norm * step / 2.0 * (1.0 + 1e-9);
        match brute_force_solve(rp, GRID_POINTS, tol) {
            Ok(grid) => {
                let slack = solution.multiplier.iter().map(|l| l.abs()).sum::<f64>() * tol + 1e-9;
                let excess = solution.primal_value - grid.best_value;
                lines.push(CheckLine::new(
                    "grid oracle",
                    excess <= slack,
                    format!(
                        "Ψ(x*) - grid minimum {excess:.3e} (allowed {slack:.3e}), {} feasible points, distance {:.3e}",
                        grid.feasible_points,
                        norm_inf(&x.iter().zip(&grid.best_point).map(|(a, b)| a - b).collect::<Vec<_>>())
                    ),
                ));
            }
            Err(e) => lines.push(CheckLine::new("grid oracle", false, e.to_string())),
        }
    } else {
        lines.push(CheckLine::skipped(
            "grid oracle",
            format!("needs 1 to {GRID_LIMIT} free unknowns, has {}", free.len()),
        ));
    }
    lines
}
