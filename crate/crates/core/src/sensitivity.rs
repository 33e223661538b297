//! Dependence of the solution on the data vector.
//!
//! Differentiating `A ∇M(Aᵀ λ(y)) = y` gives `(A C Aᵀ) ∂λ/∂y = I` with
//! `C = diag(M''(τ*))`, hence
//!
//! ```text
//! ∂λ/∂y = (A C Aᵀ)⁻¹,     ∂x/∂y = C Aᵀ (A C Aᵀ)⁻¹.
//! ```
//!
//! Signs follow the convention `x = ∇M(+Aᵀ λ)` used by the solver, so the
//! multiplier Jacobian is positive definite and `λ(y)` is a monotone map:
//! `(λ₁ - λ₂)ᵀ(y₁ - y₂) ≥ 0`.

use alloc::vec::Vec;

use crate::entropy::curvature_scalar;
use crate::error::{Error, Result};
use crate::linalg::{dot, spd_condition, Cholesky, Matrix};
use crate::problem::{BoxDomain, InverseProblem};
use crate::solver::Solution;

/// Largest condition estimate of `A C Aᵀ` accepted before inversion.
pub const MAX_CONDITION: f64 = 1e12;

/// `C_j = M''_j(τ_j) = (D_j / (e^{D_j τ_j/2} + e^{-D_j τ_j/2}))²`.
pub fn curvature_weights(tau: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    if tau.len() != domain.len() {
        return Err(Error::DimensionMismatch {
            what: "dual coordinates",
            expected: domain.len(),
            found: tau.len(),
        });
    }
    tau.iter()
        .zip(domain.widths())
        .enumerate()
        .map(|(j, (&t, &d))| {
            if d == 0.0 {
                Err(Error::DegenerateCoordinate { index: j })
            } else {
                Ok(curvature_scalar(d, t))
            }
        })
        .collect()
}

/// Sensitivity of a converged solution to the data.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// Diagonal of `C`; zero on pinned coordinates.
    pub weights: Vec<f64>,
    /// `∂λ/∂y` (M×M).
    pub multiplier_jacobian: Matrix,
    /// `∂x/∂y` (N×M).
    pub primal_jacobian: Matrix,
    /// Spectral condition number of `A C Aᵀ`.
    pub conditioning: f64,
}

impl SensitivityReport {
    /// Computes every sensitivity quantity at `solution`.
    pub fn compute(solution: &Solution, problem: &InverseProblem) -> Result<Self> {
        if !solution.converged {
            return Err(Error::NotConverged);
        }
        if solution.dual_coords.len() != problem.unknowns() {
            return Err(Error::DimensionMismatch {
                what: "solution vs problem unknowns",
                expected: problem.unknowns(),
                found: solution.dual_coords.len(),
            });
        }
        let weights: Vec<f64> = solution
            .dual_coords
            .iter()
            .zip(problem.domain().widths())
            .map(|(&t, &d)| if d == 0.0 { 0.0 } else { curvature_scalar(d, t) })
            .collect();
        let normal = problem.matrix().weighted_gram(&weights);
        let conditioning = spd_condition(&normal);
        if !(conditioning <= MAX_CONDITION) {
            return Err(Error::SingularNormalMatrix { condition: conditioning });
        }
        let chol = Cholesky::factor(&normal, 0.0).ok_or(Error::SingularNormalMatrix { condition: conditioning })?;
        let multiplier_jacobian = chol.inverse();

        // ∂x_j/∂y_k = C_j (Aᵀ J)_{jk}
        let a = problem.matrix();
        let mut primal_jacobian = a.transpose().mul(&multiplier_jacobian)?;
        for (j, &w) in weights.iter().enumerate() {
            for k in 0..primal_jacobian.cols() {
                primal_jacobian[(j, k)] *= w;
            }
        }
        Ok(Self {
            weights,
            multiplier_jacobian,
            primal_jacobian,
            conditioning,
        })
    }
}

/// `∂λ/∂y = (A C Aᵀ)⁻¹` at a converged solution.
pub fn multiplier_jacobian(solution: &Solution, problem: &InverseProblem) -> Result<Matrix> {
    SensitivityReport::compute(solution, problem).map(|r| r.multiplier_jacobian)
}

/// `∂x/∂y = C Aᵀ (A C Aᵀ)⁻¹` at a converged solution.
pub fn primal_jacobian(solution: &Solution, problem: &InverseProblem) -> Result<Matrix> {
    SensitivityReport::compute(solution, problem).map(|r| r.primal_jacobian)
}

/// The two monotonicity forms for solutions of the same matrix and box at
/// data `y₁`, `y₂`:
///
/// ```text
/// s₁ = (λ₁ - λ₂)ᵀ (y₁ - y₂)
/// s₂ = (Aᵀλ₁ - Aᵀλ₂)ᵀ (x₁ - x₂)
/// ```
///
/// Both are nonnegative, and they coincide up to the residuals since
/// `A x_i = y_i`.
pub fn le_chatelier_forms(
    first: (&InverseProblem, &Solution),
    second: (&InverseProblem, &Solution),
) -> Result<(f64, f64)> {
    let (p1, s1) = first;
    let (p2, s2) = second;
    if !(s1.converged && s2.converged) {
        return Err(Error::NotConverged);
    }
    if p1.matrix() != p2.matrix() || p1.domain() != p2.domain() {
        return Err(Error::TemplateMismatch);
    }
    let dl: Vec<f64> = s1.multiplier.iter().zip(&s2.multiplier).map(|(a, b)| a - b).collect();
    let dy: Vec<f64> = p1.data().iter().zip(p2.data()).map(|(a, b)| a - b).collect();
    let dt: Vec<f64> = s1.dual_coords.iter().zip(&s2.dual_coords).map(|(a, b)| a - b).collect();
    let dx: Vec<f64> = s1.primal.iter().zip(&s2.primal).map(|(a, b)| a - b).collect();
    Ok((dot(&dl, &dy), dot(&dt, &dx)))
}
