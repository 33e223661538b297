#![allow(dead_code)]

use boxdual::{BoxDomain, InverseProblem, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lower bounds in [-5, 5], widths in [0.1, 10].
pub fn random_box(rng: &mut ChaCha8Rng, n: usize) -> BoxDomain {
    let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let upper = lower.iter().map(|a| a + rng.random_range(0.1..10.0)).collect();
    BoxDomain::new(lower, upper).unwrap()
}

/// A point with every coordinate at relative position in [0.05, 0.95].
pub fn interior_point(rng: &mut ChaCha8Rng, dom: &BoxDomain) -> Vec<f64> {
    (0..dom.len())
        .map(|j| dom.lower()[j] + dom.widths()[j] * rng.random_range(0.05..0.95))
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let data = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Matrix::new(m, n, data).unwrap()
}

/// Random matrix and box with `y = A x₀` for an interior `x₀`.
pub fn feasible_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (InverseProblem, Vec<f64>) {
    let a = random_matrix(rng, m, n);
    let dom = random_box(rng, n);
    let x0 = interior_point(rng, &dom);
    let y = a.mul_vec(&x0);
    (InverseProblem::new(a, y, dom).unwrap(), x0)
}

/// Instance whose feasible set meets the grid of the brute-force oracle.
///
/// `A` is `[I | F]` with the columns shuffled and `F` in {-1, 0, 1}; every
/// coordinate has the same width `D` and `y = A x₀` for a grid point `x₀`
/// away from the faces. Then fixing the free coordinates on the grid puts
/// the pinned ones on the grid too, up to round-off.
pub fn lattice_instance(rng: &mut ChaCha8Rng, m: usize, n: usize, grid: usize) -> InverseProblem {
    assert!(m <= n);
    let width = rng.random_range(0.5..4.0);
    let step = width / (grid - 1) as f64;
    let lower: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|a| a + width).collect();
    let dom = BoxDomain::new(lower.clone(), upper).unwrap();

    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        a[(i, perm[i])] = 1.0;
        for &j in &perm[m..] {
            a[(i, j)] = [-1.0, 0.0, 1.0][rng.random_range(0..3)];
        }
    }
    // Keep the pinned coordinates clear of the faces for every choice of
    // free coordinates near x₀.
    let lo = (grid / 5) as i64;
    let hi = (4 * grid / 5) as i64;
    let x0: Vec<f64> = (0..n)
        .map(|j| lower[j] + rng.random_range(lo..=hi) as f64 * step)
        .collect();
    let y = a.mul_vec(&x0);
    InverseProblem::new(a, y, dom).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
