//! Closed-form torsion functions and thin-domain asymptotic coefficients.
//!
//! These are the reference values the finite-element results are checked
//! against.

mod barrier;
mod jet;
mod narrow;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use barrier::{barrier_g, barrier_poly, BarrierValue, Poly2};
pub use jet::{Jet2, Scalar};
pub use narrow::{
    gap_alternative_coefficient, gap_leading_term, narrow_coefficients, narrow_predicted_gradient_sq, GapLeadingTerm,
    NarrowCoefficients,
};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// `v0 = y (y - 1 + √3 x)(y - 1 - √3 x) / 4` on any [`Scalar`].
pub fn equilateral_torsion<T: Scalar>(x: T, y: T) -> T {
    let c = T::constant;
    let r3 = c(3f64.sqrt());
    c(0.25) * y * (y - c(1.0) + r3 * x) * (y - c(1.0) - r3 * x)
}

/// Ellipse torsion function on any [`Scalar`].
pub fn ellipse_torsion<T: Scalar>(a_semi: f64, b_semi: f64, x: T, y: T) -> T {
    let (a2, b2) = (a_semi * a_semi, b_semi * b_semi);
    let c = T::constant;
    c(a2 * b2 / (2.0 * (a2 + b2))) * (c(1.0) - x * x / c(a2) - y * y / c(b2))
}

/// Concentric annulus torsion function about the origin on any [`Scalar`],
/// written through `r²` so it stays smooth in Cartesian coordinates.
pub fn concentric_annulus_torsion<T: Scalar>(rho1: f64, rho2: f64, x: T, y: T) -> T {
    let c = T::constant;
    let k = annulus_log_coefficient(rho1, rho2);
    let r2 = x * x + y * y;
    c(0.25) * (c(rho1 * rho1) - r2) + c(0.5 * k) * (r2 / c(rho1 * rho1)).ln()
}

fn annulus_log_coefficient(rho1: f64, rho2: f64) -> f64 {
    0.25 * (rho1 * rho1 - rho2 * rho2) / (rho1 / rho2).ln()
}

/// Torsion function of the equilateral triangle with vertices `(±√3/3, 0)`
/// and `(0, 1)`: `v0 = y (y - 1 + √3 x)(y - 1 - √3 x) / 4`.
pub fn eval_equilateral_torsion(x: f64, y: f64) -> (f64, Point) {
    let value = 0.25 * y * y * y - 0.5 * y * y + 0.25 * y - 0.75 * x * x * y;
    let gx = -1.5 * x * y;
    let gy = 0.75 * y * y - y + 0.25 - 0.75 * x * x;
    (value, Point::new(gx, gy))
}

/// `1 / cosh(t)` without overflow.
fn sech(t: f64) -> f64 {
    let e = (-t.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `cosh(a) / cosh(b)` for `0 <= |a| <= b`, without overflow.
fn cosh_ratio(a: f64, b: f64) -> f64 {
    let a = a.abs();
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * b).exp())
}

/// Partial sum of the Fourier series of the torsion function of
/// `[0, 1] x [-eps, eps]`, using the first `n_terms` odd frequencies.
pub fn eval_rectangle_torsion(eps: f64, x: f64, y: f64, n_terms: usize) -> f64 {
    let mut sum = 0.0;
    for k in 0..n_terms {
        let n = (2 * k + 1) as f64;
        sum += (n * PI * x).sin() * cosh_ratio(n * PI * y, n * PI * eps) / (n * n * n);
    }
    0.5 * x * (1.0 - x) - 4.0 / PI.powi(3) * sum
}

/// `|∇u|` of the rectangle torsion function at the midpoint `(0, 0)` of the
/// short side, as a partial sum with `n_terms` odd frequencies.
///
/// The truncation error is below `1 / (π² n_terms)`.
pub fn rectangle_short_side_gradient(eps: f64, n_terms: usize) -> f64 {
    // Summed from the small terms up to limit cancellation error.
    let sum: f64 = (0..n_terms)
        .rev()
        .map(|k| {
            let n = (2 * k + 1) as f64;
            sech(n * PI * eps) / (n * n)
        })
        .sum();
    0.5 - 4.0 / (PI * PI) * sum
}

/// Torsion function of the ellipse `x²/a² + y²/b² < 1`.
pub fn eval_ellipse_torsion(a_semi: f64, b_semi: f64, x: f64, y: f64) -> (f64, Point) {
    let (a2, b2) = (a_semi * a_semi, b_semi * b_semi);
    let c = a2 * b2 / (2.0 * (a2 + b2));
    let value = c * (1.0 - x * x / a2 - y * y / b2);
    (value, Point::new(-2.0 * c * x / a2, -2.0 * c * y / b2))
}

/// Radial torsion function of the concentric annulus `rho2 < r < rho1`,
/// as `(u(r), u'(r))`.
pub fn eval_concentric_annulus_torsion(rho1: f64, rho2: f64, r: f64) -> Result<(f64, f64)> {
    if !(0.0 < rho2 && rho2 < rho1) {
        return Err(Error::InvalidArgument(format!("need 0 < rho2 < rho1, got ({rho1}, {rho2})")));
    }
    let tol = 1e-12 * rho1;
    if r < rho2 - tol || r > rho1 + tol {
        return Err(Error::InvalidArgument(format!("r = {r} outside [{rho2}, {rho1}]")));
    }
    let k = annulus_log_coefficient(rho1, rho2);
    let value = 0.25 * (rho1 * rho1 - r * r) + k * (r / rho1).ln();
    Ok((value, -0.5 * r + k / r))
}

/// Perturbation family of the equilateral triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Base extended to `(√3/3 + t, 0)`.
    Stretch,
    /// Apex moved to `(t, 1)`.
    Tilt,
}

impl Family {
    pub fn vertices(self, t: f64) -> [Point; 3] {
        let r = 3f64.sqrt() / 3.0;
        match self {
            Self::Stretch => [Point::new(-r, 0.0), Point::new(r + t, 0.0), Point::new(0.0, 1.0)],
            Self::Tilt => [Point::new(-r, 0.0), Point::new(r, 0.0), Point::new(t, 1.0)],
        }
    }

    /// Foot of the altitude and midpoint of the base, as x-coordinates.
    pub fn base_landmarks(self, t: f64) -> (f64, f64) {
        match self {
            Self::Stretch => (0.0, 0.5 * t),
            Self::Tilt => (t, 0.0),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stretch" => Ok(Self::Stretch),
            "tilt" => Ok(Self::Tilt),
            _ => Err(Error::InvalidArgument(format!("unknown family '{s}' (expected stretch or tilt)"))),
        }
    }
}

/// Right-hand side of the first-order shape-derivative problem of the family.
pub fn v1_rhs(family: Family, x: f64, y: f64) -> f64 {
    match family {
        Family::Stretch => 1.5 * 3f64.sqrt() * y - 1.5 * x,
        Family::Tilt => 3.0 * x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_values() {
        assert_eq!(eval_equilateral_torsion(0.0, 0.0).0, 0.0);
        assert!((eval_equilateral_torsion(0.0, 0.5).0 - 1.0 / 32.0).abs() < 1e-16);
        let g = eval_equilateral_torsion(0.0, 0.0).1;
        assert_eq!((g.x, g.y), (0.0, 0.25));
    }

    #[test]
    fn equilateral_gradient_matches_differences() {
        let h = 1e-6;
        for &(x, y) in &[(0.1, 0.3), (-0.2, 0.5), (0.0, 0.9)] {
            let g = eval_equilateral_torsion(x, y).1;
            let fx = (eval_equilateral_torsion(x + h, y).0 - eval_equilateral_torsion(x - h, y).0) / (2.0 * h);
            let fy = (eval_equilateral_torsion(x, y + h).0 - eval_equilateral_torsion(x, y - h).0) / (2.0 * h);
            assert!((fx - g.x).abs() < 1e-9 && (fy - g.y).abs() < 1e-9);
        }
    }

    #[test]
    fn equilateral_vanishes_on_sides() {
        let r = 3f64.sqrt() / 3.0;
        let v = [(-r, 0.0), (r, 0.0), (0.0, 1.0)];
        for k in 0..3 {
            let (s, e) = (v[k], v[(k + 1) % 3]);
            for i in 0..100 {
                let t = i as f64 / 99.0;
                let (x, y) = (s.0 + t * (e.0 - s.0), s.1 + t * (e.1 - s.1));
                assert!(eval_equilateral_torsion(x, y).0.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rectangle_series_basics() {
        for y in [-0.2, 0.0, 0.13] {
            assert_eq!(eval_rectangle_torsion(0.2, 0.0, y, 50), 0.0);
        }
        let v = eval_rectangle_torsion(0.2, 0.5, 0.0, 200);
        assert!(v > 0.0 && v < 0.125);
        assert!((v - eval_rectangle_torsion(0.2, 0.5, 0.0, 400)).abs() < 1e-12);
        // Large frequencies must not overflow.
        assert!(eval_rectangle_torsion(0.2, 0.3, 0.1, 5000).is_finite());
    }

    #[test]
    fn rectangle_gradient_at_zero_width_is_tail() {
        let n = 1000;
        let v = rectangle_short_side_gradient(0.0, n);
        assert!(v > 0.0 && v < 1.0 / (PI * PI * n as f64));
    }

    #[test]
    fn ellipse_closed_form() {
        assert_eq!(eval_ellipse_torsion(1.0, 1.0, 0.0, 0.0).0, 0.25);
        let g = eval_ellipse_torsion(1.0, 0.1, 1.0, 0.0).1;
        assert!((g.norm() - 0.01 / 1.01).abs() < 1e-16);
        let g = eval_ellipse_torsion(1.0, 0.1, 0.0, 0.1).1;
        assert!((g.norm() - 0.1 / 1.01).abs() < 1e-16);
    }

    #[test]
    fn annulus_boundaries_and_errors() {
        assert!(eval_concentric_annulus_torsion(1.0, 0.3, 1.0).unwrap().0.abs() < 1e-16);
        assert!(eval_concentric_annulus_torsion(1.0, 0.3, 0.3).unwrap().0.abs() < 1e-16);
        assert!(eval_concentric_annulus_torsion(1.0, 0.3, 0.2).is_err());
        let d = eval_concentric_annulus_torsion(1.0, 0.3, 0.3).unwrap().1;
        assert!((d - 0.4799).abs() < 1e-4);
    }

    #[test]
    fn generic_forms_agree_with_float_forms() {
        for &(x, y) in &[(0.1, 0.3), (-0.2, 0.5)] {
            assert!((equilateral_torsion(x, y) - eval_equilateral_torsion(x, y).0).abs() < 1e-16);
            assert!((ellipse_torsion(1.0, 0.4, x, y) - eval_ellipse_torsion(1.0, 0.4, x, y).0).abs() < 1e-16);
        }
        let r: f64 = 0.5;
        let u = concentric_annulus_torsion(1.0, 0.3, 0.3, 0.4);
        assert!((u - eval_concentric_annulus_torsion(1.0, 0.3, r).unwrap().0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_solve_the_torsion_equation() {
        let (x, y) = Jet2::variables(0.12, 0.41);
        assert!((equilateral_torsion(x, y).laplacian() + 1.0).abs() < 1e-14);
        assert!((ellipse_torsion(1.0, 0.1, x, y).laplacian() + 1.0).abs() < 1e-14);
        assert!((concentric_annulus_torsion(1.0, 0.3, x, y).laplacian() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn v1_rhs_values() {
        assert_eq!(v1_rhs(Family::Stretch, 0.0, 0.0), 0.0);
        assert!((v1_rhs(Family::Stretch, 0.0, 1.0) - 1.5 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(v1_rhs(Family::Tilt, 0.5, 0.7), 1.5);
    }
}
