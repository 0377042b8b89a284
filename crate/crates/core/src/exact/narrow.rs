use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GraphSide, PolyBoundaryFn};
use crate::numeric::{brent_root, sign_change_brackets};

/// Coefficients of the thin-domain expansion at one abscissa.
///
/// With `Y = y / eps`, the torsion function expands as
/// `u = eps² (-Y²/2 + a1 Y + a2) + eps⁴ (-a1'' Y³/6 - a2'' Y²/2 + a3 Y + a4) + ...`
/// and the squared boundary gradient on graph `k` as
/// `eps² lambda1 + eps⁴ lambda2_k + O(eps⁶)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a1_d: f64,
    pub a1_dd: f64,
    pub a2_d: f64,
    pub a2_dd: f64,
    pub lambda1: f64,
    pub lambda2_lower: f64,
    pub lambda2_upper: f64,
}

impl NarrowCoefficients {
    pub fn lambda2(&self, side: GraphSide) -> f64 {
        match side {
            GraphSide::Lower => self.lambda2_lower,
            GraphSide::Upper => self.lambda2_upper,
        }
    }
}

pub fn narrow_coefficients(f1: &PolyBoundaryFn, f2: &PolyBoundaryFn, x: f64) -> NarrowCoefficients {
    let (g1, g1d, g1dd) = (f1.eval(x), f1.derivative(1, x), f1.derivative(2, x));
    let (g2, g2d, g2dd) = (f2.eval(x), f2.derivative(1, x), f2.derivative(2, x));
    let a1 = 0.5 * (g1 + g2);
    let a1_d = 0.5 * (g1d + g2d);
    let a1_dd = 0.5 * (g1dd + g2dd);
    let a2 = -0.5 * g1 * g2;
    let a2_d = -0.5 * (g1d * g2 + g1 * g2d);
    let a2_dd = -0.5 * (g1dd * g2 + 2.0 * g1d * g2d + g1 * g2dd);
    let a3 = a1_dd / 6.0 * (g1 * g1 + g1 * g2 + g2 * g2) + 0.5 * a2_dd * (g1 + g2);
    let a4 = g1.powi(3) * a1_dd / 6.0 + 0.5 * a2_dd * g1 * g1 - a3 * g1;
    let lambda2 = |f: f64| {
        let t = a1_d * f + a2_d;
        t * t + (f - a1) * (f * f * a1_dd + 2.0 * f * a2_dd - 2.0 * a3)
    };
    NarrowCoefficients {
        a1,
        a2,
        a3,
        a4,
        a1_d,
        a1_dd,
        a2_d,
        a2_dd,
        lambda1: 0.25 * (g2 - g1) * (g2 - g1),
        lambda2_lower: lambda2(g1),
        lambda2_upper: lambda2(g2),
    }
}

/// Two-term prediction `eps² lambda1 + eps⁴ lambda2` of `|∇u|²` at
/// `(x, eps f_k(x))`.
pub fn narrow_predicted_gradient_sq(
    f1: &PolyBoundaryFn,
    f2: &PolyBoundaryFn,
    eps: f64,
    x: f64,
    side: GraphSide,
) -> f64 {
    let c = narrow_coefficients(f1, f2, x);
    eps * eps * c.lambda1 + eps.powi(4) * c.lambda2(side)
}

/// Leading term of `|∇u|²(upper) - |∇u|²(lower)` at the thickest section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLeadingTerm {
    /// Maximizer of `f2 - f1`.
    pub z0: f64,
    /// `(f1'' + f2'')(f2 - f1)³ / 12` at `z0`; the gap is `eps⁴` times this.
    pub coefficient: f64,
}

/// Locates `z0` and evaluates the gap coefficient. Fails when `f2 - f1` has
/// more than one interior maximizer.
pub fn gap_leading_term(f1: &PolyBoundaryFn, f2: &PolyBoundaryFn, a: f64, b: f64) -> Result<GapLeadingTerm> {
    let z0 = thickest_section(f1, f2, a, b)?;
    let w = f2.eval(z0) - f1.eval(z0);
    let s = f1.derivative(2, z0) + f2.derivative(2, z0);
    Ok(GapLeadingTerm { z0, coefficient: s * w.powi(3) / 12.0 })
}

/// The competing reading `a1'' (f2 - f1)³ / 12` of the gap coefficient, which
/// is half of [`gap_leading_term`]; kept to let experiments tell them apart.
pub fn gap_alternative_coefficient(f1: &PolyBoundaryFn, f2: &PolyBoundaryFn, z0: f64) -> f64 {
    let w = f2.eval(z0) - f1.eval(z0);
    0.5 * (f1.derivative(2, z0) + f2.derivative(2, z0)) * w.powi(3) / 12.0
}

fn thickest_section(f1: &PolyBoundaryFn, f2: &PolyBoundaryFn, a: f64, b: f64) -> Result<f64> {
    let dw = |x: f64| f2.derivative(1, x) - f1.derivative(1, x);
    let brackets = sign_change_brackets(dw, a, b, 1000);
    match brackets.as_slice() {
        [(lo, hi)] if dw(*lo) >= 0.0 => {
            if dw(*lo) == 0.0 {
                return Ok(*lo);
            }
            brent_root(dw, *lo, *hi, 1e-12)
        }
        [] => Err(Error::NotFound("f2 - f1 has no interior critical point".into())),
        other => Err(Error::NonUniqueMaximizer { count: other.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> PolyBoundaryFn {
        PolyBoundaryFn::new(c.to_vec()).unwrap()
    }

    #[test]
    fn symmetric_parabolas_at_centre() {
        let f2 = poly(&[1.0, 0.0, -1.0]);
        let f1 = f2.scaled(-1.0);
        let c = narrow_coefficients(&f1, &f2, 0.0);
        assert_eq!(c.lambda1, 1.0);
        assert_eq!(c.lambda2_lower, -4.0);
        assert_eq!(c.lambda2_upper, -4.0);
        assert_eq!(c.a2, 0.5);
        assert_eq!(c.a2_dd, -2.0);
        assert_eq!((c.a1, c.a3), (0.0, 0.0));
        let p = narrow_predicted_gradient_sq(&f1, &f2, 0.05, 0.0, GraphSide::Lower);
        assert!((p - 0.002475).abs() < 1e-17);
    }

    #[test]
    fn asymmetric_pair_values() {
        // Hand evaluation: f1 = -(1-x²)/2, f2 = 1-x² at x = 0.
        let f2 = poly(&[1.0, 0.0, -1.0]);
        let f1 = f2.scaled(-0.5);
        let c = narrow_coefficients(&f1, &f2, 0.0);
        assert_eq!(c.lambda1, 9.0 / 16.0);
        assert!((c.lambda2_lower + 9.0 / 8.0).abs() < 1e-15);
        assert!((c.lambda2_upper + 45.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn gap_signs() {
        let f2 = poly(&[1.0, 0.0, -1.0]);
        let sym = gap_leading_term(&f2.scaled(-1.0), &f2, -1.0, 1.0).unwrap();
        assert_eq!(sym.z0, 0.0);
        assert_eq!(sym.coefficient, 0.0);
        let lower_wins = gap_leading_term(&f2.scaled(-0.5), &f2, -1.0, 1.0).unwrap();
        assert!(lower_wins.z0.abs() < 1e-12);
        assert!((lower_wins.coefficient + 1.5f64.powi(3) / 12.0).abs() < 1e-14);
        let upper_wins = gap_leading_term(&f2.scaled(-1.0), &f2.scaled(0.5), -1.0, 1.0).unwrap();
        assert!(upper_wins.coefficient > 0.0);
    }

    #[test]
    fn gap_off_centre_maximizer() {
        // f2 - f1 = (1 - x²)(1 + x/2).
        let f2 = poly(&[1.0, 0.5, -1.0, -0.5]);
        let f1 = poly(&[0.0]);
        let g = gap_leading_term(&f1, &f2, -1.0, 1.0).unwrap();
        // w'(x) = 0.5 - 2x - 1.5x² = 0 -> x = (-2 + sqrt(7)) / 3
        let z = (-2.0 + 7f64.sqrt()) / 3.0;
        assert!((g.z0 - z).abs() < 1e-12);
    }

    #[test]
    fn non_unique_maximizer_is_error() {
        // f2 - f1 = (1 - x²)(x² + 0.1) has two maxima.
        let f2 = poly(&[0.1, 0.0, 0.9, 0.0, -1.0]);
        let f1 = poly(&[0.0]);
        assert!(matches!(gap_leading_term(&f1, &f2, -1.0, 1.0), Err(Error::NonUniqueMaximizer { .. })));
    }
}
