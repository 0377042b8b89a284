use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest polynomial degree accepted for a boundary profile.
pub const MAX_DEGREE: usize = 8;

/// Polynomial boundary profile `f(x) = c0 + c1 x + ... + c8 x^8`.
///
/// Serializes as the plain coefficient list in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PolyBoundaryFn {
    coeffs: Vec<f64>,
}

impl PolyBoundaryFn {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidSpec(format!("polynomial degree {} exceeds {MAX_DEGREE}", coeffs.len() - 1)));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite polynomial coefficient".into()));
        }
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Ok(Self { coeffs })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `order`-th derivative at `x`, from the coefficients.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (order..self.coeffs.len()).rev() {
            let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
            acc = acc * x + self.coeffs[k] * falling;
        }
        acc
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeffs.get(k).unwrap_or(&0.0) + other.coeffs.get(k).unwrap_or(&0.0)).collect();
        Self { coeffs }
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let prim =
            |x: f64| self.coeffs.iter().enumerate().rev().fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64) * x;
        prim(b) - prim(a)
    }
}

impl TryFrom<Vec<f64>> for PolyBoundaryFn {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PolyBoundaryFn> for Vec<f64> {
    fn from(p: PolyBoundaryFn) -> Self {
        p.coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parabola_values() {
        let f = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(f.eval(0.5), 0.75);
        assert_eq!(f.derivative(1, 0.5), -1.0);
        assert_eq!(f.derivative(2, 0.3), -2.0);
        assert_eq!(f.derivative(3, 0.3), 0.0);
        assert!((f.integral(-1.0, 1.0) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degree_nine() {
        assert!(PolyBoundaryFn::new(vec![0.0; 10]).is_err());
    }

    #[test]
    fn json_is_coefficient_list() {
        let f = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), "[1.0,0.0,-1.0]");
    }

    proptest! {
        #[test]
        fn derivative_matches_central_difference(
            c in proptest::collection::vec(-2.0f64..2.0, 1..9),
            x in -1.0f64..1.0,
        ) {
            let f = PolyBoundaryFn::new(c).unwrap();
            let h = 1e-5;
            for order in 1..=3 {
                let fd = (f.derivative(order - 1, x + h) - f.derivative(order - 1, x - h)) / (2.0 * h);
                let scale = 1.0 + f.derivative(order, x).abs() + 100.0;
                prop_assert!((fd - f.derivative(order, x)).abs() < 1e-6 * scale);
            }
        }
    }
}
