use std::sync::Arc;

use super::solution::TorsionSolution;
use super::sparse::{pcg, CsrMatrix};
use crate::error::Result;
use crate::geometry::{Mesh, Point};
use crate::numeric::gauss_legendre_5;

/// Inward normal derivative at the boundary nodes, recovered from the
/// discrete equilibrium residual.
#[derive(Clone, Debug)]
pub struct BoundaryFlux {
    pub mesh: Arc<Mesh>,
    /// Per node; zero at interior nodes.
    dudn: Vec<f64>,
    /// `∫ φ_j ds` per node; zero at interior nodes.
    weights: Vec<f64>,
}

/// One boundary node in side order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxSample {
    pub node: usize,
    pub s: f64,
    pub point: Point,
    pub dudn: f64,
}

fn edge_basis(t: f64) -> [f64; 3] {
    [(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)]
}

/// Solve `M g = r` on the boundary trace space, where `r = K u - F` at the
/// boundary nodes and `M` is the boundary mass matrix. `g` is the outward
/// normal derivative; the inward one is returned.
pub fn boundary_flux(sol: &TorsionSolution) -> Result<BoundaryFlux> {
    let mesh = &sol.mesh;
    let mut local_index = vec![usize::MAX; mesh.n_nodes()];
    let mut nodes = Vec::new();
    for e in &mesh.boundary_edges {
        for &n in &e.nodes {
            if local_index[n] == usize::MAX {
                local_index[n] = nodes.len();
                nodes.push(n);
            }
        }
    }
    let nb = nodes.len();
    let (gx, gw) = gauss_legendre_5();
    let mut locals = Vec::with_capacity(mesh.boundary_edges.len());
    let mut pairs = Vec::new();
    for e in &mesh.boundary_edges {
        let pts = [mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]], mesh.nodes[e.nodes[2]]];
        let mut m = [[0.0; 3]; 3];
        // Two panels of five points: the speed of a curved edge is not polynomial.
        for (lo, hi) in [(0.0, 0.5), (0.5, 1.0)] {
            for (x, w) in gx.iter().zip(&gw) {
                let t = lo + (hi - lo) * x;
                let speed = crate::geometry::quad_deriv(&pts, t).norm();
                let phi = edge_basis(t);
                for a in 0..3 {
                    for b in 0..3 {
                        m[a][b] += (hi - lo) * w * speed * phi[a] * phi[b];
                    }
                }
            }
        }
        let idx = e.nodes.map(|n| local_index[n]);
        for a in 0..3 {
            for b in 0..3 {
                pairs.push((idx[a], idx[b]));
            }
        }
        locals.push((idx, m));
    }
    let mut mass = CsrMatrix::from_pattern(nb, nb, pairs);
    let mut weights = vec![0.0; mesh.n_nodes()];
    for (idx, m) in &locals {
        for a in 0..3 {
            for b in 0..3 {
                let pos = mass.position(idx[a], idx[b]).unwrap();
                mass.values[pos] += m[a][b];
                weights[nodes[idx[a]]] += m[a][b];
            }
        }
    }
    let r: Vec<f64> = nodes.iter().map(|&n| sol.boundary_residual[n]).collect();
    let mut g = vec![0.0; nb];
    pcg(&mass, &r, &mut g, 1e-14, 20 * nb + 100)?;
    let mut dudn = vec![0.0; mesh.n_nodes()];
    for (k, &n) in nodes.iter().enumerate() {
        dudn[n] = -g[k];
    }
    Ok(BoundaryFlux { mesh: mesh.clone(), dudn, weights })
}

impl BoundaryFlux {
    pub fn at_node(&self, node: usize) -> f64 {
        self.dudn[node]
    }

    /// Quadratic interpolation along the side at arc length `s`.
    pub fn at(&self, side: usize, s: f64) -> f64 {
        let edge = &self.mesh.side_edges(side)[self.mesh.edge_at(side, s)];
        let t = self.mesh.edge_param(edge, s);
        edge_basis(t).iter().zip(edge.nodes).map(|(w, n)| w * self.dudn[n]).sum()
    }

    /// Derivative of the interpolated flux with respect to arc length.
    pub fn derivative_at(&self, side: usize, s: f64) -> f64 {
        let edge = &self.mesh.side_edges(side)[self.mesh.edge_at(side, s)];
        let t = self.mesh.edge_param(edge, s);
        let [f0, fm, f1] = edge.nodes.map(|n| self.dudn[n]);
        let dfdt = f0 * (4.0 * t - 3.0) + fm * (4.0 - 8.0 * t) + f1 * (4.0 * t - 1.0);
        let pts = edge.nodes.map(|n| self.mesh.nodes[n]);
        dfdt / crate::geometry::quad_deriv(&pts, t).norm()
    }

    /// `Σ_j w_j (∂u/∂n)_j` with `w_j = ∫ φ_j ds`: equals `∫ f` for the
    /// inward flux of `-Δu = f`.
    pub fn weighted_sum(&self) -> f64 {
        self.dudn.iter().zip(&self.weights).map(|(g, w)| g * w).sum()
    }

    /// Samples of one side ordered by arc length. Closed sides omit the
    /// repeated start node.
    pub fn side_samples(&self, side: usize) -> Vec<FluxSample> {
        let edges = self.mesh.side_edges(side);
        let mut out = Vec::with_capacity(2 * edges.len() + 1);
        let push = |out: &mut Vec<FluxSample>, node: usize, s: f64| {
            out.push(FluxSample { node, s, point: self.mesh.nodes[node], dudn: self.dudn[node] });
        };
        push(&mut out, edges[0].nodes[0], edges[0].s[0]);
        for e in edges {
            push(&mut out, e.nodes[1], e.s[1]);
            push(&mut out, e.nodes[2], e.s[2]);
        }
        if self.mesh.sides[side].closed {
            out.pop();
        }
        out
    }

    /// CSV `side_id,s,x,y,dudn`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "side_id,s,x,y,dudn")?;
        for side in 0..self.mesh.sides.len() {
            for p in self.side_samples(side) {
                writeln!(w, "{side},{:?},{:?},{:?},{:?}", p.s, p.point.x, p.point.y, p.dudn)?;
            }
        }
        Ok(())
    }
}
