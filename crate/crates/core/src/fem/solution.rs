use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::assemble::{assemble, assemble_with_dirichlet, LinearSystem};
use super::sparse::pcg;
use super::Rhs;
use crate::error::{Error, Result};
use crate::geometry::element::{jacobian, shape, shape_grad};
use crate::geometry::{Mesh, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative residual target for conjugate gradients.
    pub rel_tol: f64,
    /// Iteration cap is `max_iter_factor * sqrt(n_free)`.
    pub max_iter_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter_factor: 50.0 }
    }
}

impl SolveOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

/// Nodal solution of a Poisson problem on a mesh.
#[derive(Debug)]
pub struct TorsionSolution {
    pub mesh: Arc<Mesh>,
    pub nodal_values: Vec<f64>,
    pub rhs_tag: String,
    pub iterations: usize,
    pub relative_residual: f64,
    /// `(K u - F)` at boundary nodes (zero elsewhere).
    pub(crate) boundary_residual: Vec<f64>,
    hint: AtomicUsize,
}

impl Clone for TorsionSolution {
    fn clone(&self) -> Self {
        Self {
            mesh: self.mesh.clone(),
            nodal_values: self.nodal_values.clone(),
            rhs_tag: self.rhs_tag.clone(),
            iterations: self.iterations,
            relative_residual: self.relative_residual,
            boundary_residual: self.boundary_residual.clone(),
            hint: AtomicUsize::new(self.hint.load(Ordering::Relaxed)),
        }
    }
}

pub fn solve(system: &LinearSystem, opts: SolveOptions) -> Result<TorsionSolution> {
    let m = system.free_nodes.len();
    let mut x = vec![0.0; m];
    let max_iter = ((opts.max_iter_factor * (m as f64).sqrt()).ceil() as usize).max(20);
    let out = pcg(&system.stiffness, &system.load, &mut x, opts.rel_tol, max_iter)?;
    let mut values = system.dirichlet.clone();
    for (k, &i) in system.free_nodes.iter().enumerate() {
        values[i] = x[k];
    }
    let mesh = &system.mesh;
    let full = system.full_stiffness();
    let boundary_residual = (0..mesh.n_nodes())
        .map(|i| {
            if mesh.is_boundary_node(i) {
                full.row(i).map(|(j, v)| v * values[j]).sum::<f64>() - system.full_load()[i]
            } else {
                0.0
            }
        })
        .collect();
    Ok(TorsionSolution {
        mesh: system.mesh.clone(),
        nodal_values: values,
        rhs_tag: system.rhs_tag.clone(),
        iterations: out.iterations,
        relative_residual: out.relative_residual,
        boundary_residual,
        hint: AtomicUsize::new(0),
    })
}

/// Assemble and solve `-Δu = 1`, `u = 0` on the boundary.
pub fn solve_torsion(mesh: Arc<Mesh>, opts: SolveOptions) -> Result<TorsionSolution> {
    solve(&assemble(mesh, &Rhs::torsion())?, opts)
}

/// Assemble and solve `-Δu = f`, `u = g` on the boundary.
pub fn solve_poisson(
    mesh: Arc<Mesh>,
    rhs: &Rhs,
    g: impl Fn(&Point) -> f64,
    opts: SolveOptions,
) -> Result<TorsionSolution> {
    solve(&assemble_with_dirichlet(mesh, rhs, g)?, opts)
}

impl TorsionSolution {
    fn locate(&self, p: &Point) -> Result<(usize, [f64; 2])> {
        let hint = self.hint.load(Ordering::Relaxed);
        let (e, r) = self.mesh.locate(p, hint).ok_or(Error::OutsideDomain { x: p.x, y: p.y })?;
        self.hint.store(e, Ordering::Relaxed);
        Ok((e, r))
    }

    fn local_values(&self, e: usize) -> [f64; 6] {
        let el = &self.mesh.elements[e];
        std::array::from_fn(|k| self.nodal_values[el[k]])
    }

    /// Value of the quadratic interpolant at `p`.
    pub fn value_at(&self, p: &Point) -> Result<f64> {
        let (e, r) = self.locate(p)?;
        let n = shape(r[0], r[1]);
        Ok(self.local_values(e).iter().zip(n).map(|(u, n)| u * n).sum())
    }

    /// Gradient of the quadratic interpolant at `p`.
    pub fn gradient_at(&self, p: &Point) -> Result<Point> {
        let (e, r) = self.locate(p)?;
        Ok(self.element_gradient(e, r))
    }

    /// Gradient inside element `e` at reference coordinates `r`.
    pub fn element_gradient(&self, e: usize, r: [f64; 2]) -> Point {
        let coords = self.mesh.element_coords(e);
        let g = shape_grad(r[0], r[1]);
        let j = jacobian(&coords, &g);
        let u = self.local_values(e);
        let dref = g.iter().zip(u).fold(Point::zeros(), |acc, (d, u)| acc + Point::new(d[0], d[1]) * u);
        j.try_inverse().map_or(Point::zeros(), |ji| ji.transpose() * dref)
    }

    pub fn max_value(&self) -> f64 {
        self.nodal_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value over interior nodes.
    pub fn min_interior_value(&self) -> f64 {
        (0..self.mesh.n_nodes())
            .filter(|&i| !self.mesh.is_boundary_node(i))
            .map(|i| self.nodal_values[i])
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV `node_id,x,y,u`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node_id,x,y,u")?;
        for (i, (p, u)) in self.mesh.nodes.iter().zip(&self.nodal_values).enumerate() {
            writeln!(w, "{i},{:?},{:?},{:?}", p.x, p.y, u)?;
        }
        Ok(())
    }
}
