//! Scalar root finding, one-dimensional quadrature and small least-squares fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Brent's method for a root of `f` in `[a, b]`.
///
/// `f(a)` and `f(b)` must have opposite signs (a zero at either end is
/// returned directly).
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotFound(format!("root not bracketed on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Golden-section/parabolic minimization (Brent) of `f` on `[a, b]`.
/// Returns `(x_min, f(x_min))`.
pub fn brent_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..200 {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-15;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Five-point Gauss–Legendre rule on `[0, 1]` as `(nodes, weights)`.
pub fn gauss_legendre_5() -> ([f64; 5], [f64; 5]) {
    let r = (10.0f64 / 7.0).sqrt();
    let x1 = (5.0 - 2.0 * r).sqrt() / 3.0;
    let x2 = (5.0 + 2.0 * r).sqrt() / 3.0;
    let s70 = 70.0f64.sqrt();
    let w1 = (322.0 + 13.0 * s70) / 900.0;
    let w2 = (322.0 - 13.0 * s70) / 900.0;
    let w0 = 128.0 / 225.0;
    let xs = [-x2, -x1, 0.0, x1, x2];
    let ws = [w2, w1, w0, w1, w2];
    let mut nodes = [0.0; 5];
    let mut weights = [0.0; 5];
    for k in 0..5 {
        nodes[k] = 0.5 * (xs[k] + 1.0);
        weights[k] = 0.5 * ws[k];
    }
    (nodes, weights)
}

/// Least-squares solution of `a x ≈ b` given as row-major `rows`.
/// Returns the coefficients and the root-mean-square residual.
pub fn least_squares(rows: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m < n || n == 0 {
        return Err(Error::Fit(format!("{m} equations for {n} unknowns")));
    }
    // Column scaling keeps the SVD well conditioned for monomial bases.
    let mut scale = vec![0.0f64; n];
    for row in rows {
        for (s, v) in scale.iter_mut().zip(row) {
            *s = s.max(v.abs());
        }
    }
    for s in &mut scale {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j] / scale[j]);
    let rhs = DVector::from_column_slice(b);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd.solve(&rhs, smax * 1e-13).map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &a * &sol - &rhs;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    let coeffs = sol.iter().zip(&scale).map(|(c, s)| c / s).collect();
    Ok((coeffs, rms))
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Sign changes of `g` on a uniform grid of `n` intervals over `[a, b]`,
/// returned as bracketing intervals. Zero counts as positive.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut x0 = a;
    let mut neg0 = g(a) < 0.0;
    for i in 1..=n {
        let x1 = a + (b - a) * i as f64 / n as f64;
        let neg1 = g(x1) < 0.0;
        if neg0 != neg1 {
            out.push((x0, x1));
        }
        x0 = x1;
        neg0 = neg1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_root_finds_cubic_root() {
        let r = brent_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn brent_root_rejects_unbracketed() {
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn brent_min_locates_parabola_vertex() {
        let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_degree_nine() {
        let (x, w) = gauss_legendre_5();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((q - 0.1).abs() < 1e-15);
    }

    #[test]
    fn least_squares_recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, *x, x * x]).collect();
        let b: Vec<f64> = xs.iter().map(|x| 2.0 - x + 3.0 * x * x).collect();
        let (c, rms) = least_squares(&rows, &b).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 1.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12);
        assert!(rms < 1e-13);
    }

    #[test]
    fn sign_changes_counted_once() {
        let br = sign_change_brackets(|x| x.sin(), 0.5, 10.0, 1000);
        assert_eq!(br.len(), 3);
    }
}
