//! Problem instances: the box, the clean system `A x = y`, and the noisy
//! system `A x + ε = y` reduced to the clean one through `B = [A | I]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A product of closed intervals `∏ [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    widths: Vec<f64>,
}

impl BoxDomain {
    /// Checks lengths, finiteness and ordering. Zero-width coordinates are
    /// allowed and reported by [`BoxDomain::degenerate_indices`].
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (j, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFiniteEntry { what: "lower bound", index: j });
            }
            if !b.is_finite() {
                return Err(Error::NonFiniteEntry { what: "upper bound", index: j });
            }
            if a > b {
                return Err(Error::InvertedBounds { index: j, lower: a, upper: b });
            }
        }
        let widths = lower.iter().zip(&upper).map(|(a, b)| b - a).collect();
        Ok(Self { lower, upper, widths })
    }

    /// `n` copies of `[lower, upper]`.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(alloc::vec![lower; n], alloc::vec![upper; n])
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    /// True for a zero-dimensional box.
    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Lower bounds `a`.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Upper bounds `b`.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Widths `D = b - a`.
    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Center of the box.
    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.widths)
            .map(|(a, d)| a + 0.5 * d)
            .collect()
    }

    /// True when coordinate `j` has zero width.
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.widths[j] == 0.0
    }

    /// Indices of zero-width coordinates, ascending.
    pub fn degenerate_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.is_degenerate(j)).collect()
    }

    /// Membership in the closed box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Concatenation `self × other`.
    pub fn concat(&self, other: &BoxDomain) -> BoxDomain {
        let mut lower = self.lower.clone();
        lower.extend_from_slice(&other.lower);
        let mut upper = self.upper.clone();
        upper.extend_from_slice(&other.upper);
        let mut widths = self.widths.clone();
        widths.extend_from_slice(&other.widths);
        BoxDomain { lower, upper, widths }
    }

    /// Sub-box on the listed coordinates.
    pub fn select(&self, idx: &[usize]) -> BoxDomain {
        BoxDomain {
            lower: idx.iter().map(|&j| self.lower[j]).collect(),
            upper: idx.iter().map(|&j| self.upper[j]).collect(),
            widths: idx.iter().map(|&j| self.widths[j]).collect(),
        }
    }

    pub(crate) fn check_len(&self, what: &'static str, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch { what, expected: self.len(), found: n });
        }
        Ok(())
    }
}

/// `A x = y` with `x` in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseProblem {
    matrix: Matrix,
    data: Vec<f64>,
    domain: BoxDomain,
    degenerate: Vec<usize>,
}

impl InverseProblem {
    /// Builds and validates an instance.
    pub fn new(matrix: Matrix, data: Vec<f64>, domain: BoxDomain) -> Result<Self> {
        let degenerate = domain.degenerate_indices();
        Self { matrix, data, domain, degenerate }.validate()
    }

    /// Re-checks dimensions and finiteness and recomputes the degenerate
    /// coordinate list. Idempotent.
    pub fn validate(mut self) -> Result<Self> {
        if self.matrix.rows() != self.data.len() {
            return Err(Error::DimensionMismatch {
                what: "matrix rows vs data length",
                expected: self.matrix.rows(),
                found: self.data.len(),
            });
        }
        if self.matrix.cols() != self.domain.len() {
            return Err(Error::DimensionMismatch {
                what: "matrix columns vs domain length",
                expected: self.matrix.cols(),
                found: self.domain.len(),
            });
        }
        if let Some(index) = self.matrix.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { what: "matrix", index });
        }
        if let Some(index) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { what: "data", index });
        }
        // Re-run the box checks in case the domain was built by concatenation.
        let domain = BoxDomain::new(self.domain.lower.clone(), self.domain.upper.clone())?;
        self.degenerate = domain.degenerate_indices();
        self.domain = domain;
        Ok(self)
    }

    /// The matrix `A` (M×N).
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// The data vector `y`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// The box for `x`.
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Zero-width coordinates found by validation.
    pub fn degenerate(&self) -> &[usize] {
        &self.degenerate
    }

    /// Number of equations `M`.
    pub fn equations(&self) -> usize {
        self.matrix.rows()
    }

    /// Number of unknowns `N`.
    pub fn unknowns(&self) -> usize {
        self.matrix.cols()
    }

    /// Same matrix and box, different data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.matrix.clone(), data, self.domain.clone())
    }

    /// `A x - y`.
    pub fn residual_vector(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x).iter().zip(&self.data).map(|(ax, y)| ax - y).collect()
    }

    /// `‖A x - y‖_∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.matrix
            .mul_vec(x)
            .iter()
            .zip(&self.data)
            .fold(0.0, |m, (ax, y)| m.max((ax - y).abs()))
    }

    /// Eliminates zero-width coordinates: they are pinned at their bound and
    /// their contribution is moved to the right-hand side.
    pub fn reduce(&self) -> ReducedProblem {
        let n = self.unknowns();
        let free: Vec<usize> = (0..n).filter(|j| !self.degenerate.contains(j)).collect();
        let mut data = self.data.clone();
        for &j in &self.degenerate {
            let fixed = self.domain.lower[j];
            for (i, y) in data.iter_mut().enumerate() {
                *y -= self.matrix[(i, j)] * fixed;
            }
        }
        let problem = InverseProblem {
            matrix: self.matrix.select_columns(&free),
            data,
            domain: self.domain.select(&free),
            degenerate: Vec::new(),
        };
        ReducedProblem { problem, free }
    }

    /// Puts reduced coordinates back into a full-length vector, filling the
    /// pinned coordinates with their bound.
    pub fn expand(&self, free: &[usize], reduced: &[f64]) -> Vec<f64> {
        let mut full = self.domain.lower.clone();
        for (&j, &v) in free.iter().zip(reduced) {
            full[j] = v;
        }
        full
    }
}

/// A problem with its zero-width coordinates removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    /// The reduced instance; every coordinate has positive width.
    pub problem: InverseProblem,
    /// Original indices of the kept coordinates.
    pub free: Vec<usize>,
}

/// `A x + ε = y` with `x` and `ε` each in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyInverseProblem {
    base: InverseProblem,
    noise_domain: BoxDomain,
}

impl NoisyInverseProblem {
    /// The noise box must have one interval per equation.
    pub fn new(base: InverseProblem, noise_domain: BoxDomain) -> Result<Self> {
        noise_domain.check_len("noise bounds vs data length", base.equations())?;
        Ok(Self { base, noise_domain })
    }

    /// The clean part.
    pub fn base(&self) -> &InverseProblem {
        &self.base
    }

    /// Bounds `[c_j, d_j]` on the noise.
    pub fn noise_domain(&self) -> &BoxDomain {
        &self.noise_domain
    }

    /// `B z = y` with `B = [A | I_M]`, `z = (x, ε)` and the concatenated box.
    pub fn augment(&self) -> Result<InverseProblem> {
        let m = self.base.equations();
        let matrix = self.base.matrix.hstack(&Matrix::identity(m))?;
        let domain = self.base.domain.concat(&self.noise_domain);
        InverseProblem::new(matrix, self.base.data.clone(), domain)
    }
}

/// Stopping and safeguarding parameters of the dual ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target for the sup-norm of the dual gradient, i.e. of `A x - y`.
    pub tolerance: f64,
    /// Iteration budget.
    pub max_iterations: usize,
    /// Backtracking factor of the line search, in `(0, 1)`.
    pub line_search_shrink: f64,
    /// Multiplier sup-norm beyond which the problem is declared infeasible.
    pub divergence_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 500,
            line_search_shrink: 0.5,
            divergence_threshold: 1e6,
        }
    }
}

impl SolverOptions {
    /// Range checks.
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidOptions("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be positive"));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(Error::InvalidOptions("line_search_shrink must lie in (0, 1)"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::InvalidOptions("divergence_threshold must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn unit_box(n: usize) -> BoxDomain {
        BoxDomain::uniform(n, 0.0, 1.0).unwrap()
    }

    #[test]
    fn accepts_consistent_dimensions() {
        let a = Matrix::zeros(2, 3);
        let p = InverseProblem::new(a, vec![0.0, 0.0], unit_box(3)).unwrap();
        assert_eq!((p.equations(), p.unknowns()), (2, 3));
        assert!(p.degenerate().is_empty());
    }

    #[test]
    fn rejects_data_length_mismatch() {
        let err = InverseProblem::new(Matrix::zeros(2, 3), vec![0.0; 3], unit_box(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = InverseProblem::new(Matrix::zeros(2, 3), vec![0.0; 2], unit_box(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_inverted_bounds() {
        let err = BoxDomain::new(vec![2.0, 0.0], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::InvertedBounds { index: 0, lower: 2.0, upper: 1.0 });
    }

    #[test]
    fn rejects_non_finite_entries() {
        let a = Matrix::new(1, 1, vec![f64::NAN]).unwrap();
        let err = InverseProblem::new(a, vec![0.0], unit_box(1)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEntry { what: "matrix", .. }));
        let err = InverseProblem::new(Matrix::identity(1), vec![f64::INFINITY], unit_box(1)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteEntry { what: "data", .. }));
        assert!(BoxDomain::new(vec![f64::NEG_INFINITY], vec![0.0]).is_err());
    }

    #[test]
    fn flags_degenerate_coordinates_and_validates_idempotently() {
        let dom = BoxDomain::new(vec![0.0, 0.3, 0.0], vec![1.0, 0.3, 2.0]).unwrap();
        let p = InverseProblem::new(Matrix::identity(3), vec![0.5, 0.3, 1.0], dom).unwrap();
        assert_eq!(p.degenerate(), &[1]);
        let again = p.clone().validate().unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn reduction_moves_pinned_columns_to_the_data() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let dom = BoxDomain::new(vec![0.0, 0.5, 0.0], vec![1.0, 0.5, 1.0]).unwrap();
        let p = InverseProblem::new(a, vec![2.0], dom).unwrap();
        let r = p.reduce();
        assert_eq!(r.free, vec![0, 2]);
        assert_eq!(r.problem.matrix().row(0), &[1.0, 3.0]);
        assert_eq!(r.problem.data(), &[1.0]);
        assert_eq!(p.expand(&r.free, &[0.1, 0.2]), vec![0.1, 0.5, 0.2]);
    }

    #[test]
    fn augment_places_identity_block() {
        let a = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let base = InverseProblem::new(a, vec![1.0], unit_box(2)).unwrap();
        let noisy = NoisyInverseProblem::new(base, BoxDomain::uniform(1, -0.1, 0.1).unwrap()).unwrap();
        let b = noisy.augment().unwrap();
        assert_eq!((b.equations(), b.unknowns()), (1, 3));
        assert_eq!(b.matrix()[(0, 2)], 1.0);
        assert_eq!(b.domain().lower(), &[0.0, 0.0, -0.1]);
        assert_eq!(b.data(), &[1.0]);
    }

    #[test]
    fn noise_box_must_match_data_length() {
        let base = InverseProblem::new(Matrix::identity(2), vec![0.5, 0.5], unit_box(2)).unwrap();
        assert!(NoisyInverseProblem::new(base, unit_box(3)).is_err());
    }

    #[test]
    fn augmented_feasibility_matches_noisy_feasibility() {
        // (x, ε) feasible for the noisy problem iff z = (x, ε) feasible for B z = y.
        let a = Matrix::from_rows(&[[1.0, -1.0], [0.5, 2.0]]).unwrap();
        let base = InverseProblem::new(a.clone(), vec![0.2, 1.2], unit_box(2)).unwrap();
        let noise = BoxDomain::uniform(2, -0.25, 0.25).unwrap();
        let noisy = NoisyInverseProblem::new(base, noise.clone()).unwrap();
        let aug = noisy.augment().unwrap();
        for (x, eps) in [
            (vec![0.5, 0.4], vec![0.1, 0.15]),
            (vec![0.9, 0.1], vec![-0.6, 0.55]),
            (vec![1.2, 0.1], vec![0.0, 0.0]),
        ] {
            let ax = a.mul_vec(&x);
            let noisy_ok = unit_box(2).contains(&x)
                && noise.contains(&eps)
                && ax.iter().zip(&eps).zip(noisy.base().data()).all(|((p, e), y)| (p + e - y).abs() < 1e-12);
            let mut z = x.clone();
            z.extend_from_slice(&eps);
            let aug_ok = aug.domain().contains(&z) && aug.residual(&z) < 1e-12;
            assert_eq!(noisy_ok, aug_ok);
        }
    }

    #[test]
    fn options_are_range_checked() {
        assert!(SolverOptions::default().validate().is_ok());
        let bad = SolverOptions { tolerance: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverOptions { line_search_shrink: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverOptions { divergence_threshold: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
