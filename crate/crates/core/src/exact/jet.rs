use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Arithmetic needed by the closed-form torsion functions, so they can be
/// evaluated on plain floats or on [`Jet2`] for exact derivatives.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn ln(self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }
}

/// Second-order Taylor jet of a function of `(x, y)`: value, gradient and
/// Hessian, propagated exactly through arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The coordinate functions `x` and `y` at a point.
    pub fn variables(x: f64, y: f64) -> (Self, Self) {
        (Self { dx: 1.0, ..Self::constant(x) }, Self { dy: 1.0, ..Self::constant(y) })
    }

    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }

    /// Apply a scalar function with derivatives `(f, f', f'')` at `self.v`.
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f,
            dx: f1 * self.dx,
            dy: f1 * self.dy,
            dxx: f1 * self.dxx + f2 * self.dx * self.dx,
            dxy: f1 * self.dxy + f2 * self.dx * self.dy,
            dyy: f1 * self.dyy + f2 * self.dy * self.dy,
        }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, dx: -self.dx, dy: -self.dy, dxx: -self.dxx, dxy: -self.dxy, dyy: -self.dyy }
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.dx * o.v + self.v * o.dx,
            dy: self.dy * o.v + self.v * o.dy,
            dxx: self.dxx * o.v + 2.0 * self.dx * o.dx + self.v * o.dxx,
            dxy: self.dxy * o.v + self.dx * o.dy + self.dy * o.dx + self.v * o.dxy,
            dyy: self.dyy * o.v + 2.0 * self.dy * o.dy + self.v * o.dyy,
        }
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Scalar for Jet2 {
    fn constant(c: f64) -> Self {
        Jet2::constant(c)
    }

    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let (x, y) = Jet2::variables(0.3, -0.7);
        let f = x * x * y;
        assert!((f.v - 0.09 * -0.7).abs() < 1e-16);
        assert!((f.dx - 2.0 * 0.3 * -0.7).abs() < 1e-16);
        assert!((f.dy - 0.09).abs() < 1e-16);
        assert!((f.dxx - 2.0 * -0.7).abs() < 1e-16);
        assert!((f.dxy - 0.6).abs() < 1e-16);
        assert_eq!(f.dyy, 0.0);
    }

    #[test]
    fn log_of_radius_is_harmonic() {
        let (x, y) = Jet2::variables(0.4, 1.3);
        assert!((x * x + y * y).ln().laplacian().abs() < 1e-15);
    }

    #[test]
    fn quotient_matches_differences() {
        let f = |x: f64, y: f64| x / (1.0 + y * y);
        let (jx, jy) = Jet2::variables(0.5, 0.25);
        let j = jx / (Jet2::constant(1.0) + jy * jy);
        let h = 1e-4;
        let fyy = (f(0.5, 0.25 + h) - 2.0 * f(0.5, 0.25) + f(0.5, 0.25 - h)) / (h * h);
        assert!((j.dyy - fyy).abs() < 1e-6);
        assert!((j.v - f(0.5, 0.25)).abs() < 1e-16);
    }
}
