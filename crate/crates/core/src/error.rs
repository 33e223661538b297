use alloc::boxed::Box;

use crate::solver::Solution;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building, solving or analysing a problem.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two objects that must agree in size do not.
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        /// Which quantity was being checked.
        what: &'static str,
        /// Required length.
        expected: usize,
        /// Observed length.
        found: usize,
    },

    /// A box with `lower > upper`.
    #[error("inverted bounds at coordinate {index}: lower {lower} > upper {upper}")]
    InvertedBounds {
        /// Coordinate index.
        index: usize,
        /// Lower bound.
        lower: f64,
        /// Upper bound.
        upper: f64,
    },

    /// NaN or infinite input.
    #[error("non-finite entry in {what} at index {index}")]
    NonFiniteEntry {
        /// Which input held the entry.
        what: &'static str,
        /// Flat index of the entry.
        index: usize,
    },

    /// A zero-width coordinate was passed to a kernel that needs `a < b`.
    #[error("coordinate {index} has zero width")]
    DegenerateCoordinate {
        /// Coordinate index.
        index: usize,
    },

    /// A point on the boundary of the box where an interior point is required.
    #[error("coordinate {index} lies on the boundary of the box")]
    BoundaryPoint {
        /// Coordinate index.
        index: usize,
    },

    /// A point outside the closed box.
    #[error("coordinate {index} lies outside the box")]
    OutOfBox {
        /// Coordinate index.
        index: usize,
    },

    /// Solver options out of range.
    #[error("invalid solver options: {0}")]
    InvalidOptions(&'static str),

    /// The data vector is not attainable from the interior of the box; the
    /// dual iterates escape to infinity.
    #[error(
        "problem is infeasible: multiplier norm {multiplier_norm:e} after {iterations} iterations \
         with gradient norm {gradient_norm:e}"
    )]
    Infeasible {
        /// Iterations performed.
        iterations: usize,
        /// Sup-norm of the last multiplier.
        multiplier_norm: f64,
        /// Sup-norm of the last dual gradient.
        gradient_norm: f64,
        /// The last iterate.
        last: Box<Solution>,
    },

    /// The iteration budget ran out before the stopping rule was met.
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e}, gap {gap:e})")]
    MaxIterationsExceeded {
        /// Iterations performed.
        iterations: usize,
        /// Sup-norm of the last dual gradient.
        gradient_norm: f64,
        /// Last duality gap.
        gap: f64,
        /// The last iterate.
        last: Box<Solution>,
    },

    /// `A C Aᵀ` is singular or too badly conditioned to invert.
    #[error("normal matrix A C Aᵀ is singular (condition estimate {condition:e})")]
    SingularNormalMatrix {
        /// Ratio of extreme eigenvalues, `inf` when the smallest is not positive.
        condition: f64,
    },

    /// Two solutions compared as a pair do not share a matrix and box.
    #[error("solutions belong to different matrices or boxes")]
    TemplateMismatch,

    /// An operation that requires a converged solution received one that is not.
    #[error("solution has not converged")]
    NotConverged,

    /// Brute-force oracle cost guard.
    #[error("oracle instance too large: {dimension} coordinates, {grid_points} grid points per coordinate")]
    TooLarge {
        /// Number of coordinates.
        dimension: usize,
        /// Requested grid resolution.
        grid_points: usize,
    },

    /// No grid point satisfied the feasibility tolerance.
    #[error("no grid point within feasibility tolerance {tolerance:e}")]
    NoFeasibleGridPoint {
        /// The tolerance that was used.
        tolerance: f64,
    },

    /// The penalty oracle did not settle.
    #[error("penalty oracle did not converge at weight {weight:e}")]
    NotConvergedOracle {
        /// Penalty weight of the failing stage.
        weight: f64,
    },

    /// Chain size out of range.
    #[error("chain needs at least 2 states, got {0}")]
    BadSize(usize),

    /// A state index beyond the chain.
    #[error("state index {index} out of range for {states} states")]
    IndexOutOfRange {
        /// Offending index.
        index: usize,
        /// Number of states.
        states: usize,
    },

    /// Observed rows must be distinct.
    #[error("observed state {0} listed more than once")]
    DuplicateRow(usize),

    /// Transition matrix row that is not a probability vector.
    #[error("transition matrix row {row} is not stochastic")]
    NotStochastic {
        /// Offending row.
        row: usize,
    },

    /// The solver output disagrees with the logistic closed form.
    #[error("reconstruction deviates from the closed form by {deviation:e}")]
    ClosedFormMismatch {
        /// Largest componentwise deviation.
        deviation: f64,
    },
}
