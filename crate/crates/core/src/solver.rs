//! Dual ascent for `min { Ψ(x) : A x = y }`.
//!
//! The multiplier `λ` maximizes the concave dual entropy
//! `Σ(y, λ) = ⟨λ, y⟩ - M(Aᵀ λ)`, whose gradient is `y - A x(λ)` with
//! `x(λ) = ∇M(Aᵀ λ)` and whose Hessian is `-A C Aᵀ`, `C = diag(M''(Aᵀ λ))`.
//! At the maximizer `A x(λ*) = y`, `x* = x(λ*)` solves the primal problem
//! and `Ψ(x*) = Σ(y, λ*)`.
//!
//! The ascent is a damped Newton method started at `λ = 0` (the box
//! midpoint) with Armijo backtracking. When `A C Aᵀ` cannot be factored the
//! step falls back to a ridge-regularized system, and to a scaled gradient
//! step if even that fails.
//!
//! The dual is unbounded above exactly when `y` is not in the image of the
//! open box. That shows up as `‖λ‖` running away, or as the primal iterate
//! pinned to a face of the box in floating point while the residual stays
//! put; both are reported as [`Error::Infeasible`].

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::entropy::{self, curvature_scalar, log_mgf_scalar, mean_scalar};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, Cholesky, Matrix};
use crate::problem::{InverseProblem, NoisyInverseProblem, SolverOptions};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 80;
const CHOLESKY_PIVOT: f64 = 1e-13;
const RIDGE: f64 = 1e-9;
/// Consecutive iterations with a primal coordinate stuck on a face before
/// the problem is declared infeasible.
const SATURATION_LIMIT: usize = 50;
/// Largest Newton step, relative to `max(1, ‖λ‖_∞)`, at which a point with a
/// small gradient is accepted as converged.
const SETTLED_STEP: f64 = 1e-3;

/// One accepted ascent step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// `Σ(y, λ)` before the step.
    pub dual_value: f64,
    /// `‖∇Σ‖_∞` before the step.
    pub gradient_norm: f64,
    /// Accepted step length.
    pub step_length: f64,
    /// False when the Newton system was singular and a fallback was used.
    pub newton: bool,
}

/// Output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Optimal multiplier `λ*` (length M).
    pub multiplier: Vec<f64>,
    /// `τ* = Aᵀ λ*` (length N).
    pub dual_coords: Vec<f64>,
    /// `x* = ∇M(τ*)`; zero-width coordinates sit on their bound.
    pub primal: Vec<f64>,
    /// `Σ(y, λ*)`.
    pub dual_value: f64,
    /// `Ψ(x*)`.
    pub primal_value: f64,
    /// `|Ψ(x*) - Σ(y, λ*)|`.
    pub gap: f64,
    /// `‖A x* - y‖_∞`.
    pub residual: f64,
    /// Newton or fallback steps taken.
    pub iterations: usize,
    /// Whether both the residual and the gap met their tolerances.
    pub converged: bool,
    /// Per-iteration history.
    pub trace: Vec<IterationRecord>,
}

/// Duality-gap tolerance used by [`solve`]: `max(1e-8, 1e3 ε N)`.
pub fn gap_tolerance(unknowns: usize) -> f64 {
    1e-8f64.max(1e3 * f64::EPSILON * unknowns as f64)
}

fn check_multiplier(lambda: &[f64], problem: &InverseProblem) -> Result<()> {
    if lambda.len() != problem.equations() {
        return Err(Error::DimensionMismatch {
            what: "multiplier",
            expected: problem.equations(),
            found: lambda.len(),
        });
    }
    Ok(())
}

/// `Σ(y, λ) = ⟨λ, y⟩ - M(Aᵀ λ)`.
pub fn dual_objective(lambda: &[f64], problem: &InverseProblem) -> Result<f64> {
    check_multiplier(lambda, problem)?;
    let tau = problem.matrix().tr_mul_vec(lambda);
    Ok(dot(lambda, problem.data()) - entropy::log_mgf(&tau, problem.domain())?)
}

/// `∇Σ(y, λ) = y - A ∇M(Aᵀ λ)`.
pub fn dual_gradient(lambda: &[f64], problem: &InverseProblem) -> Result<Vec<f64>> {
    check_multiplier(lambda, problem)?;
    let tau = problem.matrix().tr_mul_vec(lambda);
    let x = entropy::mean_map(&tau, problem.domain())?;
    let ax = problem.matrix().mul_vec(&x);
    Ok(problem.data().iter().zip(ax).map(|(y, v)| y - v).collect())
}

/// `∇²Σ(y, λ) = -A diag(M''(Aᵀ λ)) Aᵀ`.
pub fn dual_hessian(lambda: &[f64], problem: &InverseProblem) -> Result<Matrix> {
    check_multiplier(lambda, problem)?;
    if let Some(&index) = problem.degenerate().first() {
        return Err(Error::DegenerateCoordinate { index });
    }
    let tau = problem.matrix().tr_mul_vec(lambda);
    let weights: Vec<f64> = tau
        .iter()
        .zip(problem.domain().widths())
        .map(|(&t, &d)| curvature_scalar(d, t))
        .collect();
    let mut h = problem.matrix().weighted_gram(&weights);
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            h[(i, j)] = -h[(i, j)];
        }
    }
    Ok(h)
}

/// Everything the ascent needs at one multiplier, on a problem without
/// zero-width coordinates.
struct Point {
    lambda: Vec<f64>,
    tau: Vec<f64>,
    x: Vec<f64>,
    gradient: Vec<f64>,
    dual_value: f64,
    /// Magnitude of the terms in `dual_value`, for round-off allowances.
    scale: f64,
}

impl Point {
    fn at(lambda: Vec<f64>, p: &InverseProblem) -> Self {
        let dom = p.domain();
        let tau = p.matrix().tr_mul_vec(&lambda);
        let mut mgf = 0.0;
        let mut x = Vec::with_capacity(tau.len());
        for (j, &t) in tau.iter().enumerate() {
            let (a, b, d) = (dom.lower()[j], dom.upper()[j], dom.widths()[j]);
            mgf += log_mgf_scalar(a, d, t);
            x.push(mean_scalar(a, b, d, t));
        }
        let ax = p.matrix().mul_vec(&x);
        let gradient = p.data().iter().zip(ax).map(|(y, v)| y - v).collect();
        let linear = dot(&lambda, p.data());
        Self {
            dual_value: linear - mgf,
            scale: linear.abs() + mgf.abs() + 1.0,
            lambda,
            tau,
            x,
            gradient,
        }
    }

    fn saturated(&self, p: &InverseProblem) -> bool {
        let dom = p.domain();
        self.x
            .iter()
            .enumerate()
            .any(|(j, &v)| v <= dom.lower()[j] || v >= dom.upper()[j])
    }
}

/// Ascent direction: Newton when `A C Aᵀ` factors, otherwise a ridge step,
/// otherwise the gradient scaled by the largest curvature.
fn direction(pt: &Point, p: &InverseProblem) -> (Vec<f64>, bool) {
    let weights: Vec<f64> = pt
        .tau
        .iter()
        .zip(p.domain().widths())
        .map(|(&t, &d)| curvature_scalar(d, t))
        .collect();
    let mut normal = p.matrix().weighted_gram(&weights);
    if let Some(chol) = Cholesky::factor(&normal, CHOLESKY_PIVOT) {
        return (chol.solve(&pt.gradient), true);
    }
    let scale = (0..normal.rows()).fold(0.0f64, |m, i| m.max(normal[(i, i)]));
    if !(scale > f64::MIN_POSITIVE) {
        return (pt.gradient.clone(), false);
    }
    for i in 0..normal.rows() {
        normal[(i, i)] += RIDGE * scale;
    }
    match Cholesky::factor(&normal, 0.0) {
        Some(chol) => (chol.solve(&pt.gradient), false),
        None => (pt.gradient.iter().map(|g| g / scale).collect(), false),
    }
}

struct Ascent<'a> {
    full: &'a InverseProblem,
    reduced: &'a InverseProblem,
    free: &'a [usize],
    trace: Vec<IterationRecord>,
}

impl Ascent<'_> {
    fn snapshot(&self, pt: &Point, converged: bool) -> Solution {
        let dual_coords = self.full.matrix().tr_mul_vec(&pt.lambda);
        let primal = self.full.expand(self.free, &pt.x);
        let primal_value = entropy::dual_potential(&pt.x, self.reduced.domain()).unwrap_or(f64::NAN);
        Solution {
            multiplier: pt.lambda.clone(),
            dual_coords,
            residual: self.full.residual(&primal),
            primal,
            dual_value: pt.dual_value,
            primal_value,
            gap: (primal_value - pt.dual_value).abs(),
            iterations: self.trace.len(),
            converged,
            trace: self.trace.clone(),
        }
    }

    fn infeasible(&self, pt: &Point) -> Error {
        Error::Infeasible {
            iterations: self.trace.len(),
            multiplier_norm: norm_inf(&pt.lambda),
            gradient_norm: norm_inf(&pt.gradient),
            last: Box::new(self.snapshot(pt, false)),
        }
    }

    fn stalled(&self, pt: &Point) -> Error {
        let last = self.snapshot(pt, false);
        Error::MaxIterationsExceeded {
            iterations: self.trace.len(),
            gradient_norm: norm_inf(&pt.gradient),
            gap: last.gap,
            last: Box::new(last),
        }
    }

    /// Backtracking along `dir`. Falls back to the full step when it only
    /// loses round-off in `Σ` but still shrinks the gradient, which is what
    /// happens once `Σ` is flat to machine precision.
    fn line_search(&self, pt: &Point, dir: &[f64], shrink: f64) -> Option<(Point, f64)> {
        let slope = dot(&pt.gradient, dir);
        // below this length a trial point no longer differs from λ
        let negligible = 4.0 * f64::EPSILON * norm_inf(&pt.lambda).max(1.0);
        let dir_norm = norm_inf(dir);
        let mut t = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            if t * dir_norm <= negligible {
                break;
            }
            let trial = step(&pt.lambda, dir, t);
            let next = Point::at(trial, self.reduced);
            if next.dual_value.is_finite() && next.dual_value >= pt.dual_value + ARMIJO * t * slope {
                return Some((next, t));
            }
            t *= shrink;
        }
        let next = Point::at(step(&pt.lambda, dir, 1.0), self.reduced);
        let slack = 16.0 * f64::EPSILON * pt.scale.max(next.scale);
        (next.dual_value >= pt.dual_value - slack && norm_inf(&next.gradient) < norm_inf(&pt.gradient))
            .then_some((next, 1.0))
    }
}

fn step(lambda: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    lambda.iter().zip(dir).map(|(l, d)| l + t * d).collect()
}

/// Maximizes the dual entropy and recovers the primal solution.
///
/// Zero-width coordinates are pinned at their bound and removed before the
/// ascent; the returned vectors are full length.
pub fn solve(problem: &InverseProblem, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let reduced = problem.reduce();
    let rp = &reduced.problem;
    let gap_tol = gap_tolerance(problem.unknowns());
    let mut run = Ascent {
        full: problem,
        reduced: rp,
        free: &reduced.free,
        trace: Vec::new(),
    };

    let mut pt = Point::at(vec![0.0; problem.equations()], rp);
    // An equation with no free unknowns left has a constant residual.
    let dead_row = (0..rp.equations())
        .any(|i| rp.matrix().row(i).iter().all(|&a| a == 0.0) && pt.gradient[i].abs() > opts.tolerance);
    if dead_row {
        return Err(run.infeasible(&pt));
    }
    let mut saturated_for = 0usize;
    loop {
        let gnorm = norm_inf(&pt.gradient);
        let saturated = pt.saturated(rp);
        let (mut dir, mut newton) = direction(&pt, rp);
        if !(dot(&pt.gradient, &dir) > 0.0) || dir.iter().any(|d| !d.is_finite()) {
            dir = pt.gradient.clone();
            newton = false;
        }
        // A small gradient alone is not enough: when y sits on the boundary
        // of A·Ω the gradient decays geometrically while Newton keeps
        // proposing unit-size steps toward infinity.
        let settled = !newton || norm_inf(&dir) <= SETTLED_STEP * norm_inf(&pt.lambda).max(1.0);
        if gnorm <= opts.tolerance && settled && !saturated {
            let candidate = run.snapshot(&pt, true);
            if candidate.residual <= opts.tolerance && candidate.gap <= gap_tol {
                return Ok(candidate);
            }
        }
        if run.trace.len() >= opts.max_iterations {
            return Err(run.stalled(&pt));
        }
        if norm_inf(&pt.lambda) > opts.divergence_threshold {
            return Err(run.infeasible(&pt));
        }
        // Either a primal coordinate sits on a face, or the gradient has
        // vanished while Newton still points off to infinity.
        let escaping = saturated || (gnorm <= opts.tolerance && !settled);
        saturated_for = if escaping { saturated_for + 1 } else { 0 };
        if saturated_for > SATURATION_LIMIT {
            return Err(run.infeasible(&pt));
        }

        let Some((next, t)) = run.line_search(&pt, &dir, opts.line_search_shrink) else {
            return Err(run.stalled(&pt));
        };
        run.trace.push(IterationRecord {
            dual_value: pt.dual_value,
            gradient_norm: gnorm,
            step_length: t,
            newton,
        });
        pt = next;
    }
}

/// Solution of a noisy problem split into signal and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySolution {
    /// Solution of the augmented problem over `z = (x, ε)`.
    pub joint: Solution,
    /// `x*`.
    pub signal: Vec<f64>,
    /// `ε*`, recovered from `λ*` directly since the identity block gives
    /// `τ_{N+j} = λ_j`.
    pub noise: Vec<f64>,
}

/// Solves `A x + ε = y` through the augmented system `[A | I] z = y`.
pub fn solve_noisy(problem: &NoisyInverseProblem, opts: &SolverOptions) -> Result<NoisySolution> {
    let augmented = problem.augment()?;
    let joint = solve(&augmented, opts)?;
    let n = problem.base().unknowns();
    let nd = problem.noise_domain();
    let noise = joint
        .multiplier
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            if nd.is_degenerate(j) {
                nd.lower()[j]
            } else {
                mean_scalar(nd.lower()[j], nd.upper()[j], nd.widths()[j], l)
            }
        })
        .collect();
    Ok(NoisySolution {
        signal: joint.primal[..n].to_vec(),
        noise,
        joint,
    })
}
