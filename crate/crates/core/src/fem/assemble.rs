use std::sync::Arc;

use rayon::prelude::*;

use super::sparse::CsrMatrix;
use super::Rhs;
use crate::error::{Error, Result};
use crate::geometry::element::{jacobian, map_point, quadrature7, shape, shape_grad};
use crate::geometry::{Mesh, Point};

/// Galerkin system with Dirichlet nodes eliminated.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub mesh: Arc<Mesh>,
    /// Stiffness over the free nodes.
    pub stiffness: CsrMatrix,
    /// Load over the free nodes, including the lifting of Dirichlet data.
    pub load: Vec<f64>,
    /// Free index of each node, `None` for constrained nodes.
    pub free_index: Vec<Option<usize>>,
    pub free_nodes: Vec<usize>,
    /// Prescribed values (zero at free nodes).
    pub dirichlet: Vec<f64>,
    pub rhs_tag: String,
    pub(crate) full_stiffness: CsrMatrix,
    pub(crate) full_load: Vec<f64>,
}

type Local = ([[f64; 6]; 6], [f64; 6]);

#[allow(clippy::needless_range_loop)]
fn element_system(coords: &[Point; 6], rhs: &Rhs, element: usize, affine: bool) -> Result<Local> {
    let (qp, qw) = quadrature7();
    let mut k = [[0.0; 6]; 6];
    let mut f = [0.0; 6];
    let affine_jac = affine.then(|| jacobian(coords, &shape_grad(1.0 / 3.0, 1.0 / 3.0)));
    for (r, w) in qp.iter().zip(qw) {
        let g = shape_grad(r[0], r[1]);
        let j = match affine_jac {
            Some(j) => j,
            None => jacobian(coords, &g),
        };
        let det = j.determinant();
        if !(det > 0.0) {
            return Err(Error::NonPositiveJacobian { element, det });
        }
        let jit = j.try_inverse().ok_or(Error::NonPositiveJacobian { element, det })?.transpose();
        let grads: Vec<Point> = g.iter().map(|d| jit * Point::new(d[0], d[1])).collect();
        let n = shape(r[0], r[1]);
        let fx = rhs.eval(&map_point(coords, r[0], r[1]));
        let wd = w * det;
        for a in 0..6 {
            f[a] += wd * fx * n[a];
            for b in a..6 {
                k[a][b] += wd * grads[a].dot(&grads[b]);
            }
        }
    }
    for a in 0..6 {
        for b in 0..a {
            k[a][b] = k[b][a];
        }
    }
    Ok((k, f))
}

/// Assemble with homogeneous Dirichlet data on the whole boundary.
pub fn assemble(mesh: Arc<Mesh>, rhs: &Rhs) -> Result<LinearSystem> {
    assemble_with_dirichlet(mesh, rhs, |_| 0.0)
}

/// Assemble with Dirichlet data `g` on the whole boundary.
pub fn assemble_with_dirichlet(mesh: Arc<Mesh>, rhs: &Rhs, g: impl Fn(&Point) -> f64) -> Result<LinearSystem> {
    let n = mesh.n_nodes();
    let locals: Vec<Local> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| element_system(&mesh.element_coords(e), rhs, e, mesh.is_straight(e)))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> =
        mesh.elements.iter().flat_map(|el| el.iter().flat_map(move |&a| el.iter().map(move |&b| (a, b)))).collect();
    let mut full = CsrMatrix::from_pattern(n, n, pairs);
    let mut full_load = vec![0.0; n];
    for (el, (k, f)) in mesh.elements.iter().zip(&locals) {
        for a in 0..6 {
            full_load[el[a]] += f[a];
            for b in 0..6 {
                let pos = full.position(el[a], el[b]).expect("pattern covers element couplings");
                full.values[pos] += k[a][b];
            }
        }
    }

    let mut free_index = vec![None; n];
    let mut free_nodes = Vec::new();
    let mut dirichlet = vec![0.0; n];
    for i in 0..n {
        if mesh.is_boundary_node(i) {
            dirichlet[i] = g(&mesh.nodes[i]);
        } else {
            free_index[i] = Some(free_nodes.len());
            free_nodes.push(i);
        }
    }
    let mut row_ptr = vec![0usize];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut load = Vec::with_capacity(free_nodes.len());
    for &i in &free_nodes {
        let mut fi = full_load[i];
        for (j, v) in full.row(i) {
            match free_index[j] {
                Some(fj) => {
                    col_idx.push(fj);
                    values.push(v);
                }
                None => fi -= v * dirichlet[j],
            }
        }
        row_ptr.push(col_idx.len());
        load.push(fi);
    }
    let m = free_nodes.len();
    let stiffness = CsrMatrix { n_rows: m, n_cols: m, row_ptr, col_idx, values };
    Ok(LinearSystem {
        mesh,
        stiffness,
        load,
        free_index,
        free_nodes,
        dirichlet,
        rhs_tag: rhs.tag.clone(),
        full_stiffness: full,
        full_load,
    })
}

impl LinearSystem {
    /// Load vector over all nodes, before elimination.
    pub fn full_load(&self) -> &[f64] {
        &self.full_load
    }

    pub fn full_stiffness(&self) -> &CsrMatrix {
        &self.full_stiffness
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, triangle_mesh, DomainSpec};

    #[test]
    fn single_element_load_is_area() {
        let m = triangle_mesh(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0), 1).unwrap();
        let sys = assemble(Arc::new(m), &Rhs::torsion()).unwrap();
        assert!((sys.full_load().iter().sum::<f64>() - 0.5).abs() < 1e-15);
        assert!(sys.free_nodes.is_empty());
    }

    #[test]
    fn disk_load_is_pi() {
        let m = build_mesh(&DomainSpec::Ellipse { a_semi: 1.0, b_semi: 1.0 }, 0.05).unwrap();
        let sys = assemble(Arc::new(m), &Rhs::torsion()).unwrap();
        let total: f64 = sys.full_load().iter().sum();
        assert!((total - std::f64::consts::PI).abs() < 2e-3 * std::f64::consts::PI);
    }

    #[test]
    fn odd_load_is_antisymmetric() {
        let r = 3f64.sqrt() / 3.0;
        let m = Arc::new(build_mesh(&DomainSpec::triangle([-r, 0.0], [r, 0.0], [0.0, 1.0]), 0.05).unwrap());
        let sys = assemble(m.clone(), &Rhs::new("3x", |p| 3.0 * p.x)).unwrap();
        let load = sys.full_load();
        let mut by_pos = std::collections::HashMap::new();
        for (i, p) in m.nodes.iter().enumerate() {
            by_pos.insert(((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64), i);
        }
        for (i, p) in m.nodes.iter().enumerate() {
            let j = by_pos[&((-p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64)];
            assert!((load[i] + load[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn stiffness_is_symmetric_and_annihilates_constants() {
        let m = build_mesh(&DomainSpec::Annulus { rho1: 1.0, rho2: 0.3, offset: 0.2 }, 0.1).unwrap();
        let sys = assemble(Arc::new(m), &Rhs::torsion()).unwrap();
        let k = sys.full_stiffness();
        assert!(k.asymmetry() < 1e-12 * k.max_abs());
        let ones = vec![1.0; k.n_rows];
        let mut y = vec![0.0; k.n_rows];
        k.mul_vec(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(sys.stiffness.n_rows, sys.free_nodes.len());
    }
}
