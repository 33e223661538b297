//! Box-constrained linear inverse problems through convex duality.
//!
//! Given `A x = y` with `x` restricted to a box `∏ [a_j, b_j]`, this crate
//! selects the solution minimizing the entropy-like potential
//!
//! ```text
//! Ψ(x) = Σ_j p_j ln p_j + (1 - p_j) ln (1 - p_j),   p_j = (x_j - a_j) / (b_j - a_j)
//! ```
//!
//! subject to `A x = y`. `Ψ` is the convex conjugate of the log-moment
//! generating function `M(τ) = Σ_j ln(e^{a_j τ_j} + e^{b_j τ_j})` of the
//! two-point measure sitting on the box endpoints, so the constrained problem
//! is solved by maximizing the concave dual
//!
//! ```text
//! Σ(y, λ) = ⟨λ, y⟩ - M(Aᵀ λ)
//! ```
//!
//! over unconstrained multipliers `λ ∈ ℝ^M`. The primal solution is then
//! recovered in closed form as `x_j = ∂M/∂τ_j` evaluated at `τ = Aᵀ λ`, which
//! always lies strictly inside the box.
//!
//! Layout:
//! - [`problem`]: validated problem instances, degenerate-coordinate reduction,
//!   and the `B = [A | I]` augmentation for noisy data.
//! - [`entropy`]: the scalar kernels (`M`, its gradient and inverse, `Ψ`,
//!   the Bregman divergence of `Ψ` and two comparison bounds).
//! - [`solver`]: damped Newton ascent on the dual and primal recovery.
//! - [`sensitivity`]: Jacobians of the multiplier and of the solution with
//!   respect to the data, plus the monotonicity forms.
//! - [`oracle`]: brute-force and penalty references used for cross-checks.
//! - [`markov`]: reconstruction of a bounded initial observable of a finite
//!   Markov chain from partial observations.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]
// `!(a <= b)` is deliberate: NaN has to fail the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod entropy;
pub mod linalg;
pub mod markov;
mod math;
pub mod oracle;
pub mod problem;
pub mod sensitivity;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use problem::{BoxDomain, InverseProblem, NoisyInverseProblem, SolverOptions};
pub use sensitivity::SensitivityReport;
pub use solver::{NoisySolution, Solution};
