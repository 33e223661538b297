//! Reconstructing a bounded initial observable of a finite Markov chain.
//!
//! With transition matrix `P` and an unknown `f` satisfying `0 ≤ f_j ≤ b`,
//! only a few evolved values `g_i = Σ_j P_{ij} f_j` are observed. The rows of
//! `P` at the observed states form `A`, and the entropy solution of
//! `A f = g` on `[0, b]^N` has the logistic form
//!
//! ```text
//! f*_j = b / (1 + e^{-b (Aᵀ λ*)_j})
//! ```
//!
//! which [`reconstruct_initial`] checks against the solver output.
//!
//! State indices are 0-based throughout.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::entropy::{bregman_divergence, sigmoid};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::problem::{BoxDomain, InverseProblem, SolverOptions};
use crate::solver::{solve, Solution};

/// Allowed deviation of a transition row sum from 1.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// Allowed deviation of the solver primal from the logistic closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-10;

/// Family of transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Steps left or right with probability 1/2; the end states bounce back
    /// with probability 1.
    ReflectingRandomWalk,
    /// Every entry equals `1/n`.
    UniformSmoother,
    /// User supplied.
    Custom,
}

/// A validated row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    kind: ChainKind,
    transition: Matrix,
}

impl ChainSpec {
    /// Wraps a user supplied transition matrix after checking it is square,
    /// nonnegative and row-stochastic.
    pub fn custom(transition: Matrix) -> Result<Self> {
        let n = transition.rows();
        if n < 2 {
            return Err(Error::BadSize(n));
        }
        if transition.cols() != n {
            return Err(Error::DimensionMismatch {
                what: "transition matrix columns",
                expected: n,
                found: transition.cols(),
            });
        }
        for i in 0..n {
            let row = transition.row(i);
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry {
                    what: "transition matrix",
                    index: i * n + j,
                });
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::NotStochastic { row: i });
            }
        }
        Ok(Self {
            kind: ChainKind::Custom,
            transition,
        })
    }

    /// Number of states.
    pub fn states(&self) -> usize {
        self.transition.rows()
    }

    /// Family the matrix came from.
    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// `P`.
    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    fn check_rows(&self, rows: &[usize]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &r in rows {
            if r >= self.states() {
                return Err(Error::IndexOutOfRange {
                    index: r,
                    states: self.states(),
                });
            }
            if !seen.insert(r) {
                return Err(Error::DuplicateRow(r));
            }
        }
        Ok(())
    }
}

/// Builds one of the generated chains on `n ≥ 2` states. `Custom` has no
/// generator; use [`ChainSpec::custom`].
pub fn build_chain(n: usize, kind: ChainKind) -> Result<ChainSpec> {
    if n < 2 {
        return Err(Error::BadSize(n));
    }
    let mut p = Matrix::zeros(n, n);
    match kind {
        ChainKind::ReflectingRandomWalk => {
            p[(0, 1)] = 1.0;
            p[(n - 1, n - 2)] = 1.0;
            for i in 1..n - 1 {
                p[(i, i - 1)] = 0.5;
                p[(i, i + 1)] = 0.5;
            }
        }
        ChainKind::UniformSmoother => {
            let w = 1.0 / n as f64;
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] = w;
                }
            }
        }
        ChainKind::Custom => {
            return Err(Error::InvalidOptions("custom chains need an explicit transition matrix"));
        }
    }
    Ok(ChainSpec { kind, transition: p })
}

/// `g_i = (P f)_i` for each observed state `i` in `rows`.
pub fn forward_observe(chain: &ChainSpec, f: &[f64], rows: &[usize]) -> Result<Vec<f64>> {
    if f.len() != chain.states() {
        return Err(Error::DimensionMismatch {
            what: "observable",
            expected: chain.states(),
            found: f.len(),
        });
    }
    chain.check_rows(rows)?;
    Ok(rows
        .iter()
        .map(|&i| chain.transition.row(i).iter().zip(f).map(|(p, v)| p * v).sum())
        .collect())
}

/// `m` states spread over `0..n`: `⌊k n / m⌋` for `k = 0..m`.
pub fn evenly_spaced_rows(n: usize, m: usize) -> Vec<usize> {
    (0..m.min(n)).map(|k| k * n / m.min(n)).collect()
}

/// A smooth profile in `[0.1 b, 0.9 b]`, used as the default truth.
pub fn smooth_profile(n: usize, bound: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = j as f64 / (n.max(2) - 1) as f64;
            bound * (0.5 + 0.4 * libm::sin(2.0 * core::f64::consts::PI * s) * libm::cos(0.5 * s))
        })
        .collect()
}

/// A reconstruction task: chain, observed states, bound and data.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionCase {
    chain: ChainSpec,
    observed_rows: Vec<usize>,
    bound: f64,
    true_f: Option<Vec<f64>>,
    g: Vec<f64>,
}

impl ReconstructionCase {
    /// Observes a known `true_f` on `rows`.
    pub fn from_truth(chain: ChainSpec, rows: Vec<usize>, bound: f64, true_f: Vec<f64>) -> Result<Self> {
        check_bound(bound)?;
        if let Some(index) = true_f.iter().position(|&v| !(0.0..=bound).contains(&v)) {
            return Err(Error::OutOfBox { index });
        }
        let g = forward_observe(&chain, &true_f, &rows)?;
        Self::build(chain, rows, bound, Some(true_f), g)
    }

    /// Uses the observations `g` directly; nothing is known about the truth.
    pub fn from_observations(chain: ChainSpec, rows: Vec<usize>, bound: f64, g: Vec<f64>) -> Result<Self> {
        check_bound(bound)?;
        Self::build(chain, rows, bound, None, g)
    }

    fn build(chain: ChainSpec, rows: Vec<usize>, bound: f64, true_f: Option<Vec<f64>>, g: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidOptions("at least one observed state is required"));
        }
        chain.check_rows(&rows)?;
        if g.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                what: "observations",
                expected: rows.len(),
                found: g.len(),
            });
        }
        Ok(Self {
            chain,
            observed_rows: rows,
            bound,
            true_f,
            g,
        })
    }

    /// The chain.
    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    /// Observed states.
    pub fn observed_rows(&self) -> &[usize] {
        &self.observed_rows
    }

    /// Upper bound `b`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// The observable that generated `g`, when known.
    pub fn true_f(&self) -> Option<&[f64]> {
        self.true_f.as_deref()
    }

    /// Observations.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `A = P[rows, :]`, `y = g`, boxes `[0, b]^N`.
    pub fn problem(&self) -> Result<InverseProblem> {
        let a = self.chain.transition.select_rows(&self.observed_rows);
        let domain = BoxDomain::uniform(self.chain.states(), 0.0, self.bound)?;
        InverseProblem::new(a, self.g.clone(), domain)
    }
}

fn check_bound(bound: f64) -> Result<()> {
    if bound.is_finite() && bound > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidOptions("bound must be positive and finite"))
    }
}

/// How far the reconstruction is from the truth. Reported, never asserted:
/// the problem is underdetermined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryQuality {
    /// `max_j |f*_j - f_j|`.
    pub sup_error: f64,
    /// `δ²(f*, f)`; infinite when the truth touches a bound.
    pub bregman: f64,
}

/// Output of [`reconstruct_initial`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Full solver output.
    pub solution: Solution,
    /// `f*`.
    pub f: Vec<f64>,
    /// `max_j |f*_j - b σ(b (Aᵀλ*)_j)|`.
    pub closed_form_deviation: f64,
    /// Present when the case carries a truth.
    pub quality: Option<RecoveryQuality>,
}

/// Solves the reconstruction and checks the logistic closed form.
pub fn reconstruct_initial(case: &ReconstructionCase, opts: &SolverOptions) -> Result<Reconstruction> {
    let problem = case.problem()?;
    let solution = solve(&problem, opts)?;
    let b = case.bound;
    let closed_form_deviation = solution
        .dual_coords
        .iter()
        .zip(&solution.primal)
        .map(|(&t, &x)| (x - b * sigmoid(b * t)).abs())
        .fold(0.0, f64::max);
    if !(closed_form_deviation <= CLOSED_FORM_TOLERANCE) {
        return Err(Error::ClosedFormMismatch {
            deviation: closed_form_deviation,
        });
    }
    let quality = case.true_f.as_ref().map(|truth| {
        let sup_error = solution
            .primal
            .iter()
            .zip(truth)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let bregman = bregman_divergence(&solution.primal, truth, problem.domain()).unwrap_or(f64::INFINITY);
        RecoveryQuality { sup_error, bregman }
    });
    Ok(Reconstruction {
        f: solution.primal.clone(),
        solution,
        closed_form_deviation,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn generated_chains() {
        let p = build_chain(2, ChainKind::ReflectingRandomWalk).unwrap();
        assert_eq!(p.transition(), &Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap());
        let u = build_chain(3, ChainKind::UniformSmoother).unwrap();
        assert!(u.transition().as_slice().iter().all(|&v| v == 1.0 / 3.0));
        for n in [2, 3, 7, 50] {
            for kind in [ChainKind::ReflectingRandomWalk, ChainKind::UniformSmoother] {
                let c = build_chain(n, kind).unwrap();
                assert!(ChainSpec::custom(c.transition().clone()).is_ok());
            }
        }
        assert_eq!(build_chain(1, ChainKind::UniformSmoother), Err(Error::BadSize(1)));
        assert!(build_chain(3, ChainKind::Custom).is_err());
    }

    #[test]
    fn custom_chain_validation() {
        let bad = Matrix::from_rows(&[[0.5, 0.4], [0.0, 1.0]]).unwrap();
        assert_eq!(ChainSpec::custom(bad), Err(Error::NotStochastic { row: 0 }));
        let negative = Matrix::from_rows(&[[1.5, -0.5], [0.0, 1.0]]).unwrap();
        assert_eq!(ChainSpec::custom(negative), Err(Error::NotStochastic { row: 0 }));
    }

    #[test]
    fn observation_examples() {
        let walk = build_chain(2, ChainKind::ReflectingRandomWalk).unwrap();
        assert_eq!(forward_observe(&walk, &[0.0, 1.0], &[0]).unwrap(), vec![1.0]);
        let walk = build_chain(6, ChainKind::ReflectingRandomWalk).unwrap();
        let g = forward_observe(&walk, &[0.3; 6], &[0, 2, 5]).unwrap();
        assert!(g.iter().all(|v| (v - 0.3).abs() < 1e-15));
        let smooth = build_chain(4, ChainKind::UniformSmoother).unwrap();
        let g = forward_observe(&smooth, &[0.0, 0.2, 0.4, 1.0], &[1, 3]).unwrap();
        assert!(g.iter().all(|v| (v - 0.4).abs() < 1e-15));
        assert_eq!(
            forward_observe(&smooth, &[0.0; 4], &[4]),
            Err(Error::IndexOutOfRange { index: 4, states: 4 })
        );
        assert_eq!(forward_observe(&smooth, &[0.0; 4], &[1, 1]), Err(Error::DuplicateRow(1)));
    }

    #[test]
    fn spaced_rows() {
        assert_eq!(evenly_spaced_rows(50, 10), vec![0, 5, 10, 15, 20, 25, 30, 35, 40, 45]);
        assert_eq!(evenly_spaced_rows(7, 3), vec![0, 2, 4]);
    }

    #[test]
    fn two_state_walk_rests_at_midpoint() {
        let walk = build_chain(2, ChainKind::ReflectingRandomWalk).unwrap();
        let case = ReconstructionCase::from_observations(walk, vec![0], 1.0, vec![0.75]).unwrap();
        let r = reconstruct_initial(&case, &SolverOptions::default()).unwrap();
        assert!((r.f[0] - 0.5).abs() < 1e-12);
        assert!((r.f[1] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn uniform_smoother_midpoint_data() {
        let smooth = build_chain(5, ChainKind::UniformSmoother).unwrap();
        let case = ReconstructionCase::from_observations(smooth, vec![0, 3], 2.0, vec![1.0, 1.0]).unwrap();
        let r = reconstruct_initial(&case, &SolverOptions::default()).unwrap();
        assert!(r.f.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn default_demo_is_interior_and_consistent() {
        let n = 50;
        let chain = build_chain(n, ChainKind::ReflectingRandomWalk).unwrap();
        let truth = smooth_profile(n, 1.0);
        let rows = evenly_spaced_rows(n, 10);
        let case = ReconstructionCase::from_truth(chain.clone(), rows.clone(), 1.0, truth).unwrap();
        let r = reconstruct_initial(&case, &SolverOptions::default()).unwrap();
        assert!(r.closed_form_deviation <= CLOSED_FORM_TOLERANCE);
        assert!(r.f.iter().all(|&v| v > 0.0 && v < 1.0));
        let g = forward_observe(&chain, &r.f, &rows).unwrap();
        for (a, b) in g.iter().zip(case.g()) {
            assert!((a - b).abs() <= 1e-8);
        }
        let q = r.quality.unwrap();
        assert!(q.sup_error.is_finite() && q.bregman >= 0.0);
    }

    #[test]
    fn unattainable_observation_is_infeasible() {
        let walk = build_chain(3, ChainKind::ReflectingRandomWalk).unwrap();
        let case = ReconstructionCase::from_observations(walk, vec![1], 1.0, vec![1.5]).unwrap();
        assert!(matches!(
            reconstruct_initial(&case, &SolverOptions::default()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn case_validation() {
        let walk = build_chain(3, ChainKind::ReflectingRandomWalk).unwrap();
        assert_eq!(
            ReconstructionCase::from_truth(walk.clone(), vec![0], 1.0, vec![0.0, 2.0, 0.5]),
            Err(Error::OutOfBox { index: 1 })
        );
        assert!(ReconstructionCase::from_observations(walk.clone(), vec![0], 0.0, vec![0.5]).is_err());
        assert!(ReconstructionCase::from_observations(walk, vec![0, 1], 1.0, vec![0.5]).is_err());
    }
}
