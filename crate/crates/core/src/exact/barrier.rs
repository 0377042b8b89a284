use serde::{Deserialize, Serialize};

const N: usize = 9;

/// Bivariate polynomial `Σ c[i][j] x^i y^j` of total degree below 9.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    c: [[f64; N]; N],
}

impl Poly2 {
    pub fn zero() -> Self {
        Self { c: [[0.0; N]; N] }
    }

    pub fn monomial(coef: f64, i: usize, j: usize) -> Self {
        let mut p = Self::zero();
        p.c[i][j] = coef;
        p
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for i in 0..N {
            for j in 0..N {
                p.c[i][j] += o.c[i][j];
            }
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.c.iter_mut().flatten().for_each(|v| *v *= s);
        p
    }

    /// Product; panics if the degree bound is exceeded.
    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for i in 0..N {
            for j in 0..N {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                for k in 0..N {
                    for l in 0..N {
                        if o.c[k][l] != 0.0 {
                            assert!(i + k < N && j + l < N, "Poly2 degree overflow");
                            p.c[i + k][j + l] += self.c[i][j] * o.c[k][l];
                        }
                    }
                }
            }
        }
        p
    }

    pub fn dx(&self) -> Self {
        let mut p = Self::zero();
        for i in 1..N {
            for j in 0..N {
                p.c[i - 1][j] = i as f64 * self.c[i][j];
            }
        }
        p
    }

    pub fn dy(&self) -> Self {
        let mut p = Self::zero();
        for i in 0..N {
            for j in 1..N {
                p.c[i][j - 1] = j as f64 * self.c[i][j];
            }
        }
        p
    }

    pub fn laplacian(&self) -> Self {
        self.dx().dx().add(&self.dy().dy())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for i in (0..N).rev() {
            let row = self.c[i].iter().rev().fold(0.0, |acc, c| acc * y + c);
            total = total * x + row;
        }
        total
    }
}

/// The polynomial `g = xy (3/2 (1-y)² - 9/2 x² + (1-y)³ - 3√3 x³) / 8`.
pub fn barrier_poly() -> Poly2 {
    let one_minus_y = Poly2::monomial(1.0, 0, 0).add(&Poly2::monomial(-1.0, 0, 1));
    let sq = one_minus_y.mul(&one_minus_y);
    let cube = sq.mul(&one_minus_y);
    let bracket =
        sq.scale(1.5).add(&Poly2::monomial(-4.5, 2, 0)).add(&cube).add(&Poly2::monomial(-3.0 * 3f64.sqrt(), 3, 0));
    Poly2::monomial(0.125, 1, 1).mul(&bracket)
}

/// Right-hand side the barrier is built against:
/// `3x/2 + 3xy²/2 + 9√3 x²y/2`.
fn barrier_rhs() -> Poly2 {
    Poly2::monomial(1.5, 1, 0).add(&Poly2::monomial(1.5, 1, 2)).add(&Poly2::monomial(4.5 * 3f64.sqrt(), 2, 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierValue {
    pub value: f64,
    /// `-Δg` minus the intended right-hand side, from exact differentiation.
    pub laplacian_residual: f64,
    /// `∂²g/∂x∂y` at the origin.
    pub g_xy_origin: f64,
}

pub fn barrier_g(x: f64, y: f64) -> BarrierValue {
    let g = barrier_poly();
    let residual = g.laplacian().scale(-1.0).add(&barrier_rhs().scale(-1.0));
    BarrierValue {
        value: g.eval(x, y),
        laplacian_residual: residual.eval(x, y),
        g_xy_origin: g.dx().dy().eval(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn vanishes_on_axes() {
        for t in [-1.0, -0.3, 0.0, 0.4, 2.0] {
            assert_eq!(barrier_g(t, 0.0).value, 0.0);
            assert_eq!(barrier_g(0.0, t).value, 0.0);
        }
    }

    #[test]
    fn laplacian_identity_and_mixed_derivative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            assert!(barrier_g(x, y).laplacian_residual.abs() < 1e-12);
        }
        assert_eq!(barrier_g(0.3, 0.2).g_xy_origin, 5.0 / 16.0);
    }

    #[test]
    fn poly2_eval_matches_direct_formula() {
        let (x, y) = (0.3f64, 0.45f64);
        let direct =
            x * y / 8.0 * (1.5 * (1.0 - y).powi(2) - 4.5 * x * x + (1.0 - y).powi(3) - 3.0 * 3f64.sqrt() * x.powi(3));
        assert!((barrier_g(x, y).value - direct).abs() < 1e-16);
    }
}
