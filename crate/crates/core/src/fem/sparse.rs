use rayon::prelude::*;

use crate::error::{Error, Result};

const CHUNK: usize = 4096;

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sparsity pattern from `(row, col)` pairs; values start at zero.
    pub fn from_pattern(n_rows: usize, n_cols: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.par_sort_unstable();
        pairs.dedup();
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _) in &pairs {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let nnz = col_idx.len();
        Self { n_rows, n_cols, row_ptr, col_idx, values: vec![0.0; nnz] }
    }

    /// Position of entry `(r, c)` in `values`.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        cols.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.values[k])
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, i)).collect()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// `y = A x`, rows in parallel.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(1024).enumerate().for_each(|(i, yi)| {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        });
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.n_rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Dot product with a fixed chunking, so the result does not depend on the
/// number of threads.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from `x = 0`.
///
/// Stops when `|b - A x| <= rel_tol |b|`; fails after `max_iter` iterations.
pub fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        x.par_iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(&q).for_each(|(r, q)| *r -= alpha * q);
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= rel_tol {
            return Ok(CgOutcome { iterations: it, relative_residual: res });
        }
        z.par_iter_mut().zip(&r).zip(&inv_diag).for_each(|((z, r), d)| *z = r * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut pairs = Vec::new();
        for i in 0..n {
            pairs.push((i, i));
            if i > 0 {
                pairs.push((i, i - 1));
            }
            if i + 1 < n {
                pairs.push((i, i + 1));
            }
        }
        let mut a = CsrMatrix::from_pattern(n, n, pairs);
        for i in 0..n {
            let k = a.position(i, i).unwrap();
            a.values[k] = 2.0;
            for j in [i.wrapping_sub(1), i + 1] {
                if let Some(k) = (j < n).then(|| a.position(i, j)).flatten() {
                    a.values[k] = -1.0;
                }
            }
        }
        a
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let n = 200;
        let a = laplacian_1d(n);
        let exact: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * 0.05).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul_vec(&exact, &mut b);
        let mut x = vec![0.0; n];
        let out = pcg(&a, &b, &mut x, 1e-12, 1000).unwrap();
        assert!(out.relative_residual <= 1e-12);
        let err = x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let a = laplacian_1d(100);
        let b = vec![1.0; 100];
        let mut x = vec![0.0; 100];
        assert!(matches!(pcg(&a, &b, &mut x, 1e-14, 3), Err(Error::NoConvergence { iterations: 3, .. })));
    }

    #[test]
    fn dot_is_chunk_stable() {
        let a: Vec<f64> = (0..20000).map(|i| (i as f64).sin()).collect();
        let serial: f64 = a.chunks(CHUNK).map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum();
        assert_eq!(dot(&a, &a), serial);
    }
}
