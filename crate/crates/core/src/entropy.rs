//! Analytic kernels of the two-point endpoint measure.
//!
//! Per coordinate with bounds `a < b` and width `D = b - a`:
//!
//! ```text
//! M(τ)    = ln(e^{aτ} + e^{bτ})                 = aτ + softplus(Dτ)
//! M'(τ)   = (a e^{aτ} + b e^{bτ}) / (e^{aτ} + e^{bτ}) = a + D·sigmoid(Dτ)
//! M''(τ)  = D² sigmoid(Dτ) sigmoid(-Dτ)
//! ψ(ξ)    = p ln p + q ln q,   p = (ξ - a)/D,  q = (b - ξ)/D
//! ψ'(ξ)   = (1/D) ln((ξ - a)/(b - ξ))            = (M')⁻¹(ξ)
//! ```
//!
//! `ψ` is the convex conjugate of `M`; `M'` maps ℝ bijectively onto `(a, b)`.
//! Vector versions are sums (for `M`, `Ψ`) or componentwise maps.
//!
//! Everything is evaluated in overflow-safe form: `softplus` and `sigmoid`
//! branch on the sign of their argument, and `M'` is computed from whichever
//! endpoint is closer so that points near `b` keep full relative accuracy in
//! `b - ξ`.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::math;
use crate::problem::BoxDomain;

/// Dual coordinates `τ`, one per constrained coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCoordinates(Vec<f64>);

impl DualCoordinates {
    /// Rejects non-finite entries.
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if let Some(index) = tau.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFiniteEntry { what: "dual coordinates", index });
        }
        Ok(Self(tau))
    }

    /// Unwraps the vector.
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DualCoordinates {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `ln(1 + e^u)` without overflow.
#[inline]
pub fn softplus(u: f64) -> f64 {
    u.max(0.0) + math::ln_1p(math::exp(-u.abs()))
}

/// `1 / (1 + e^{-u})` without overflow.
#[inline]
pub fn sigmoid(u: f64) -> f64 {
    let e = math::exp(-u.abs());
    if u >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * math::ln(x)
    }
}

/// One coordinate of `M`: `ln(e^{aτ} + e^{bτ})`.
#[inline]
pub fn log_mgf_scalar(lower: f64, width: f64, tau: f64) -> f64 {
    lower * tau + softplus(width * tau)
}

/// One coordinate of `M'`; lands in `[a, b]`, strictly inside unless the
/// exponential tail underflows.
#[inline]
pub fn mean_scalar(lower: f64, upper: f64, width: f64, tau: f64) -> f64 {
    let u = width * tau;
    if u >= 0.0 {
        upper - width * sigmoid(-u)
    } else {
        lower + width * sigmoid(u)
    }
}

/// One coordinate of `M''`: `(D / (e^{Dτ/2} + e^{-Dτ/2}))²`.
#[inline]
pub fn curvature_scalar(width: f64, tau: f64) -> f64 {
    let e = math::exp(-(width * tau).abs());
    let s = 1.0 + e;
    width * width * e / (s * s)
}

fn check_nondegenerate(domain: &BoxDomain) -> Result<()> {
    match domain.widths().iter().position(|&d| d == 0.0) {
        Some(index) => Err(Error::DegenerateCoordinate { index }),
        None => Ok(()),
    }
}

/// `M(τ) = Σ_j ln(e^{a_j τ_j} + e^{b_j τ_j})`.
pub fn log_mgf(tau: &[f64], domain: &BoxDomain) -> Result<f64> {
    domain.check_len("dual coordinates", tau.len())?;
    check_nondegenerate(domain)?;
    Ok(tau
        .iter()
        .zip(domain.lower().iter().zip(domain.widths()))
        .map(|(&t, (&a, &d))| log_mgf_scalar(a, d, t))
        .sum())
}

/// `∇M(τ)`: the point of the box whose dual coordinates are `τ`.
pub fn mean_map(tau: &[f64], domain: &BoxDomain) -> Result<Vec<f64>> {
    domain.check_len("dual coordinates", tau.len())?;
    check_nondegenerate(domain)?;
    Ok(tau
        .iter()
        .enumerate()
        .map(|(j, &t)| mean_scalar(domain.lower()[j], domain.upper()[j], domain.widths()[j], t))
        .collect())
}

/// `(∇M)⁻¹(ξ)`: `τ_j = (1/D_j) ln((ξ_j - a_j)/(b_j - ξ_j))`.
///
/// Requires a strictly interior point; nothing is clamped.
pub fn inverse_mean_map(xi: &[f64], domain: &BoxDomain) -> Result<DualCoordinates> {
    domain.check_len("point", xi.len())?;
    check_nondegenerate(domain)?;
    let mut tau = Vec::with_capacity(xi.len());
    for (j, &x) in xi.iter().enumerate() {
        let (a, b, d) = (domain.lower()[j], domain.upper()[j], domain.widths()[j]);
        if !(a < x && x < b) {
            return Err(Error::BoundaryPoint { index: j });
        }
        tau.push(math::ln((x - a) / (b - x)) / d);
    }
    DualCoordinates::new(tau)
}

/// Classifies coordinate `j` of `x`: errors when outside the closed box,
/// otherwise returns whether it sits on the boundary.
fn on_boundary(x: f64, a: f64, b: f64, j: usize) -> Result<bool> {
    if !(a <= x && x <= b) {
        return Err(Error::OutOfBox { index: j });
    }
    Ok(x == a || x == b)
}

/// `Ψ(ξ) = Σ_j p_j ln p_j + q_j ln q_j` on the closed box (`0 ln 0 = 0`).
pub fn dual_potential(xi: &[f64], domain: &BoxDomain) -> Result<f64> {
    domain.check_len("point", xi.len())?;
    check_nondegenerate(domain)?;
    let mut total = 0.0;
    for (j, &x) in xi.iter().enumerate() {
        let (a, b, d) = (domain.lower()[j], domain.upper()[j], domain.widths()[j]);
        on_boundary(x, a, b, j)?;
        total += xlnx((x - a) / d) + xlnx((b - x) / d);
    }
    Ok(total)
}

/// Bregman divergence of `Ψ`:
///
/// ```text
/// δ²(ξ, η) = Σ_j p_j(ξ) ln(p_j(ξ)/p_j(η)) + q_j(ξ) ln(q_j(ξ)/q_j(η))
/// ```
///
/// `ξ` may touch the boundary, `η` must be strictly interior.
pub fn bregman_divergence(xi: &[f64], eta: &[f64], domain: &BoxDomain) -> Result<f64> {
    domain.check_len("point", xi.len())?;
    domain.check_len("reference point", eta.len())?;
    check_nondegenerate(domain)?;
    let mut total = 0.0;
    for j in 0..xi.len() {
        let (a, b, d) = (domain.lower()[j], domain.upper()[j], domain.widths()[j]);
        on_boundary(xi[j], a, b, j)?;
        if on_boundary(eta[j], a, b, j)? {
            return Err(Error::BoundaryPoint { index: j });
        }
        let (pa, pb) = (xi[j] - a, b - xi[j]);
        let (ra, rb) = (eta[j] - a, b - eta[j]);
        let left = if pa == 0.0 { 0.0 } else { pa / d * math::ln(pa / ra) };
        let right = if pb == 0.0 { 0.0 } else { pb / d * math::ln(pb / rb) };
        total += left + right;
    }
    Ok(total)
}

/// Quadratic lower bound `2 Σ_j ((η_j - ξ_j)/D_j)² ≤ δ²(ξ, η)`.
pub fn divergence_lower_bound(xi: &[f64], eta: &[f64], domain: &BoxDomain) -> Result<f64> {
    domain.check_len("point", xi.len())?;
    domain.check_len("reference point", eta.len())?;
    check_nondegenerate(domain)?;
    let mut total = 0.0;
    for j in 0..xi.len() {
        let (a, b, d) = (domain.lower()[j], domain.upper()[j], domain.widths()[j]);
        on_boundary(xi[j], a, b, j)?;
        on_boundary(eta[j], a, b, j)?;
        let r = (eta[j] - xi[j]) / d;
        total += r * r;
    }
    Ok(2.0 * total)
}

/// Upper bound `Σ_j ((η_j - ξ_j)/D_j)(φ_j(η_j) - φ_j(ξ_j)) ≥ δ²(ξ, η)` with
/// `φ(x) = ln((x - a)/(b - x))`. Both points must be strictly interior.
pub fn divergence_upper_bound(xi: &[f64], eta: &[f64], domain: &BoxDomain) -> Result<f64> {
    domain.check_len("point", xi.len())?;
    domain.check_len("reference point", eta.len())?;
    check_nondegenerate(domain)?;
    let mut total = 0.0;
    for j in 0..xi.len() {
        let (a, b, d) = (domain.lower()[j], domain.upper()[j], domain.widths()[j]);
        if on_boundary(xi[j], a, b, j)? || on_boundary(eta[j], a, b, j)? {
            return Err(Error::BoundaryPoint { index: j });
        }
        let phi = |x: f64| math::ln((x - a) / (b - x));
        total += (eta[j] - xi[j]) / d * (phi(eta[j]) - phi(xi[j]));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::LN_2;

    fn dom(a: &[f64], b: &[f64]) -> BoxDomain {
        BoxDomain::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn log_mgf_examples() {
        let unit = dom(&[0.0], &[1.0]);
        assert!(close(log_mgf(&[0.0], &unit).unwrap(), LN_2, 1e-15));
        let two = dom(&[-1.0, 0.0], &[1.0, 1.0]);
        assert!(close(log_mgf(&[0.0, 0.0], &two).unwrap(), 2.0 * LN_2, 1e-15));
        let big = log_mgf(&[700.0], &unit).unwrap();
        assert!(big.is_finite() && close(big, 700.0, 1e-12));
        let huge = log_mgf(&[1e6], &unit).unwrap();
        assert_eq!(huge, 1e6);
    }

    #[test]
    fn mean_map_examples() {
        let d = dom(&[-1.0, 2.0], &[3.0, 2.5]);
        assert_eq!(mean_map(&[0.0, 0.0], &d).unwrap(), d.midpoint());
        let unit = dom(&[0.0], &[1.0]);
        let x = mean_map(&[3.0f64.ln()], &unit).unwrap()[0];
        assert!(close(x, 0.75, 1e-15));
        let x = mean_map(&[50.0], &unit).unwrap()[0];
        assert!((1.0 - x).abs() <= 1e-20);
    }

    #[test]
    fn inverse_mean_map_examples() {
        let d = dom(&[-1.0, 2.0], &[3.0, 2.5]);
        let tau = inverse_mean_map(&d.midpoint(), &d).unwrap();
        assert_eq!(&*tau, &[0.0, 0.0]);
        let unit = dom(&[0.0], &[1.0]);
        assert!(close(inverse_mean_map(&[0.75], &unit).unwrap()[0], 3.0f64.ln(), 1e-15));
        // a = 0, b = 2, ξ = 1.9: τ = ln(19)/2, checked by mapping back.
        let wide = dom(&[0.0], &[2.0]);
        let tau = inverse_mean_map(&[1.9], &wide).unwrap();
        assert!(close(tau[0], 0.5 * 19.0f64.ln(), 1e-15));
        assert!(close(tau[0], 1.4722194895832204, 1e-12));
        assert!(close(mean_map(&tau, &wide).unwrap()[0], 1.9, 1e-15));
    }

    #[test]
    fn inverse_mean_map_rejects_boundary() {
        let unit = dom(&[0.0], &[1.0]);
        assert_eq!(inverse_mean_map(&[1.0], &unit), Err(Error::BoundaryPoint { index: 0 }));
        assert_eq!(inverse_mean_map(&[0.0], &unit), Err(Error::BoundaryPoint { index: 0 }));
        assert_eq!(inverse_mean_map(&[1.5], &unit), Err(Error::BoundaryPoint { index: 0 }));
    }

    #[test]
    fn dual_potential_examples() {
        let unit = dom(&[0.0], &[1.0]);
        assert!(close(dual_potential(&[0.5], &unit).unwrap(), -LN_2, 1e-15));
        let d = dom(&[-1.0, 2.0, 0.0], &[3.0, 2.5, 1.0]);
        assert_eq!(dual_potential(d.lower(), &d).unwrap(), 0.0);
        assert_eq!(dual_potential(d.upper(), &d).unwrap(), 0.0);
        assert!(close(dual_potential(&d.midpoint(), &d).unwrap(), -3.0 * LN_2, 1e-14));
        assert_eq!(dual_potential(&[1.5], &unit), Err(Error::OutOfBox { index: 0 }));
    }

    #[test]
    fn bregman_examples() {
        let unit = dom(&[0.0], &[1.0]);
        assert_eq!(bregman_divergence(&[0.3], &[0.3], &unit).unwrap(), 0.0);
        let v = bregman_divergence(&[0.5], &[0.25], &unit).unwrap();
        assert!(close(v, 0.5 * (4.0f64 / 3.0).ln(), 1e-15));
        assert!(close(v, 0.143841036225890, 1e-12));
        // Definition route: Ψ(ξ) - Ψ(η) - (ξ - η) Ψ'(η), with Ψ'(η) = (∇M)⁻¹(η).
        let by_def = dual_potential(&[0.5], &unit).unwrap()
            - dual_potential(&[0.25], &unit).unwrap()
            - 0.25 * inverse_mean_map(&[0.25], &unit).unwrap()[0];
        assert!(close(v, by_def, 1e-15));
        assert_eq!(
            bregman_divergence(&[0.5], &[1.0], &unit),
            Err(Error::BoundaryPoint { index: 0 })
        );
        assert_eq!(bregman_divergence(&[1.2], &[0.5], &unit), Err(Error::OutOfBox { index: 0 }));
        // ξ on the boundary is fine.
        assert!(close(bregman_divergence(&[1.0], &[0.5], &unit).unwrap(), LN_2, 1e-15));
    }

    #[test]
    fn bound_examples() {
        let unit = dom(&[0.0], &[1.0]);
        assert_eq!(divergence_lower_bound(&[0.4], &[0.4], &unit).unwrap(), 0.0);
        assert_eq!(divergence_upper_bound(&[0.4], &[0.4], &unit).unwrap(), 0.0);
        let lo = divergence_lower_bound(&[0.5], &[0.25], &unit).unwrap();
        let hi = divergence_upper_bound(&[0.5], &[0.25], &unit).unwrap();
        let mid = bregman_divergence(&[0.5], &[0.25], &unit).unwrap();
        assert!(close(lo, 0.125, 1e-16));
        assert!(close(hi, 0.25 * 3.0f64.ln(), 1e-15));
        assert!(close(hi, 0.274653072167027, 1e-12));
        assert!(lo <= mid && mid <= hi);
        let wide = dom(&[0.0, 0.0], &[2.0, 2.0]);
        let lo = divergence_lower_bound(&[0.5, 1.0], &[1.5, 1.0], &wide).unwrap();
        assert!(close(lo, 0.5, 1e-16));
        assert_eq!(
            divergence_upper_bound(&[0.0], &[0.5], &unit),
            Err(Error::BoundaryPoint { index: 0 })
        );
        assert_eq!(
            divergence_lower_bound(&[-0.1], &[0.5], &unit),
            Err(Error::OutOfBox { index: 0 })
        );
    }

    #[test]
    fn degenerate_and_length_errors() {
        let d = dom(&[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(log_mgf(&[0.0, 0.0], &d), Err(Error::DegenerateCoordinate { index: 1 }));
        assert_eq!(mean_map(&[0.0, 0.0], &d), Err(Error::DegenerateCoordinate { index: 1 }));
        let unit = dom(&[0.0], &[1.0]);
        assert!(matches!(log_mgf(&[0.0, 0.0], &unit), Err(Error::DimensionMismatch { .. })));
        assert!(DualCoordinates::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn curvature_scalar_matches_closed_form() {
        assert!(close(curvature_scalar(1.0, 0.0), 0.25, 1e-16));
        assert!(close(curvature_scalar(2.0, 0.0), 1.0, 1e-16));
        let (d, t) = (1.7f64, 0.9f64);
        let direct = (d / ((d * t / 2.0).exp() + (-d * t / 2.0).exp())).powi(2);
        assert!(close(curvature_scalar(d, t), direct, 1e-15));
        assert_eq!(curvature_scalar(1.0, 1e4), 0.0);
    }

    #[test]
    fn stable_helpers_agree_with_naive_forms() {
        for u in [-30.0, -2.5, -1e-3, 0.0, 0.7, 12.0, 30.0] {
            let naive_sp = (1.0 + f64::exp(u)).ln();
            let naive_sig = 1.0 / (1.0 + f64::exp(-u));
            assert!(close(softplus(u), naive_sp, 1e-14 * naive_sp.max(1.0)));
            assert!(close(sigmoid(u), naive_sig, 1e-15));
        }
        assert_eq!(sigmoid(-1e4), 0.0);
        assert_eq!(softplus(-1e4), 0.0);
    }
}
