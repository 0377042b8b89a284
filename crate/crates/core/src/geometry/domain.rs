use serde::{Deserialize, Serialize};

use super::{Point, PolyBoundaryFn};
use crate::error::{Error, Result};

const GRID: usize = 1000;

/// Thin domain `{ a < x < b, eps f1(x) < y < eps f2(x) }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowSpec {
    pub a: f64,
    pub b: f64,
    pub f1: PolyBoundaryFn,
    pub f2: PolyBoundaryFn,
    pub eps: f64,
}

impl NarrowSpec {
    pub fn new(a: f64, b: f64, f1: PolyBoundaryFn, f2: PolyBoundaryFn, eps: f64) -> Result<Self> {
        let s = Self { a, b, f1, f2, eps };
        s.validate()?;
        Ok(s)
    }

    /// Lower and upper boundary heights at `x`.
    pub fn bounds(&self, x: f64) -> (f64, f64) {
        (self.eps * self.f1.eval(x), self.eps * self.f2.eval(x))
    }

    /// Largest width `eps (f2 - f1)` over a grid of the interval.
    pub fn max_gap(&self) -> f64 {
        (0..=GRID)
            .map(|i| {
                let x = self.a + (self.b - self.a) * i as f64 / GRID as f64;
                self.eps * (self.f2.eval(x) - self.f1.eval(x))
            })
            .fold(0.0, f64::max)
    }

    /// The domain reflected through `y -> -y`: `(f1, f2) -> (-f2, -f1)`.
    pub fn mirrored(&self) -> Self {
        Self { a: self.a, b: self.b, f1: self.f2.scaled(-1.0), f2: self.f1.scaled(-1.0), eps: self.eps }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a < self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidSpec(format!("need a < b, got [{}, {}]", self.a, self.b)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidSpec(format!("eps must be positive, got {}", self.eps)));
        }
        for (name, f) in [("f1", &self.f1), ("f2", &self.f2)] {
            for x in [self.a, self.b] {
                if f.eval(x).abs() > 1e-12 {
                    return Err(Error::InvalidSpec(format!("{name}({x}) = {} is not 0", f.eval(x))));
                }
            }
        }
        for i in 0..=GRID {
            let x = self.a + (self.b - self.a) * i as f64 / GRID as f64;
            if i > 0 && i < GRID && self.f2.eval(x) <= self.f1.eval(x) {
                return Err(Error::InvalidSpec(format!("f2 <= f1 at x = {x}")));
            }
            if self.f1.derivative(2, x) < -1e-10 {
                return Err(Error::InvalidSpec(format!("f1 is not convex at x = {x}")));
            }
            if self.f2.derivative(2, x) > 1e-10 {
                return Err(Error::InvalidSpec(format!("f2 is not concave at x = {x}")));
            }
        }
        Ok(())
    }
}

/// One of the supported parametric domain families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainSpec {
    Triangle {
        #[serde(rename = "A")]
        a: Point,
        #[serde(rename = "B")]
        b: Point,
        #[serde(rename = "C")]
        c: Point,
    },
    Narrow(NarrowSpec),
    /// `[0, 1] x [-eps, eps]`.
    Rectangle {
        eps: f64,
    },
    /// Ellipse centred at the origin with semi-axes along x and y.
    Ellipse {
        a_semi: f64,
        b_semi: f64,
    },
    /// Disk of radius `rho1` about the origin minus the closed disk of radius
    /// `rho2` about `(offset, 0)`.
    Annulus {
        rho1: f64,
        rho2: f64,
        offset: f64,
    },
}

impl DomainSpec {
    pub fn triangle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        Self::Triangle { a: Point::new(a[0], a[1]), b: Point::new(b[0], b[1]), c: Point::new(c[0], c[1]) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Triangle { a, b, c } => {
                let area2 = (b - a).perp(&(c - a));
                let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
                if !area2.is_finite() || area2.abs() <= 1e-12 * scale * scale {
                    return Err(Error::InvalidSpec("triangle vertices are collinear".into()));
                }
            }
            Self::Narrow(n) => n.validate()?,
            Self::Rectangle { eps } => {
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::InvalidSpec(format!("rectangle eps must lie in (0, 1), got {eps}")));
                }
            }
            Self::Ellipse { a_semi, b_semi } => {
                if !(*a_semi > 0.0 && *b_semi > 0.0) || !a_semi.is_finite() || !b_semi.is_finite() {
                    return Err(Error::InvalidSpec("ellipse semi-axes must be positive".into()));
                }
            }
            Self::Annulus { rho1, rho2, offset } => {
                if !(*rho2 > 0.0 && rho2 + offset.abs() < *rho1) {
                    return Err(Error::InvalidSpec(format!(
                        "annulus needs 0 < rho2 and rho2 + |offset| < rho1, got ({rho1}, {rho2}, {offset})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Triangle { a, b, c } => (b - a).norm().max((c - a).norm()).max((c - b).norm()),
            Self::Narrow(n) => (n.b - n.a).max(n.max_gap()),
            Self::Rectangle { eps } => (1.0 + 4.0 * eps * eps).sqrt(),
            Self::Ellipse { a_semi, b_semi } => 2.0 * a_semi.max(*b_semi),
            Self::Annulus { rho1, .. } => 2.0 * rho1,
        }
    }

    /// Exact area.
    pub fn area(&self) -> f64 {
        match self {
            Self::Triangle { a, b, c } => 0.5 * (b - a).perp(&(c - a)).abs(),
            Self::Narrow(n) => n.eps * (n.f2.integral(n.a, n.b) - n.f1.integral(n.a, n.b)),
            Self::Rectangle { eps } => 2.0 * eps,
            Self::Ellipse { a_semi, b_semi } => std::f64::consts::PI * a_semi * b_semi,
            Self::Annulus { rho1, rho2, .. } => std::f64::consts::PI * (rho1 * rho1 - rho2 * rho2),
        }
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self, Self::Triangle { .. } | Self::Rectangle { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parabola_pair(eps: f64) -> NarrowSpec {
        let f1 = PolyBoundaryFn::new(vec![-1.0, 0.0, 1.0]).unwrap();
        let f2 = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).unwrap();
        NarrowSpec::new(-1.0, 1.0, f1, f2, eps).unwrap()
    }

    #[test]
    fn json_shapes() {
        let t = DomainSpec::triangle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"type":"triangle","A":[0.0,0.0],"B":[1.0,0.0],"C":[0.0,1.0]}"#
        );
        let n = DomainSpec::Narrow(parabola_pair(0.1));
        let js = serde_json::to_string(&n).unwrap();
        assert_eq!(js, r#"{"type":"narrow","a":-1.0,"b":1.0,"f1":[-1.0,0.0,1.0],"f2":[1.0,0.0,-1.0],"eps":0.1}"#);
        let back: DomainSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, n);
        let a: DomainSpec = serde_json::from_str(r#"{"type":"annulus","rho1":1,"rho2":0.3,"offset":0.2}"#).unwrap();
        assert_eq!(a, DomainSpec::Annulus { rho1: 1.0, rho2: 0.3, offset: 0.2 });
    }

    #[test]
    fn validation_failures() {
        assert!(DomainSpec::triangle([0.0, 0.0], [1.0, 1.0], [2.0, 2.0]).validate().is_err());
        assert!(DomainSpec::Annulus { rho1: 1.0, rho2: 0.5, offset: 0.5 }.validate().is_err());
        assert!(DomainSpec::Rectangle { eps: 1.5 }.validate().is_err());
        let f = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).unwrap();
        // f1 = f2: empty interior.
        assert!(NarrowSpec::new(-1.0, 1.0, f.clone(), f.clone(), 0.1).is_err());
        // f2 = -(1 - x^2) is convex, not concave.
        assert!(NarrowSpec::new(-1.0, 1.0, f.scaled(-2.0), f.scaled(-1.0), 0.1).is_err());
    }

    #[test]
    fn narrow_area_and_mirror() {
        let n = parabola_pair(0.1);
        assert!((DomainSpec::Narrow(n.clone()).area() - 0.1 * 8.0 / 3.0).abs() < 1e-15);
        let m = n.mirrored();
        assert_eq!(m.f1.eval(0.3), -n.f2.eval(0.3));
        assert!(m.validate().is_ok());
    }
}
