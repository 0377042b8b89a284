use std::collections::HashMap;
use std::io::Write;

use super::element::{self, EDGE_VERTICES};
use super::Point;
use crate::error::{Error, Result};
use crate::numeric::{brent_root, gauss_legendre_5};

const NONE: usize = usize::MAX;

/// Boundary edge of a quadratic element, oriented along increasing arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub element: usize,
    pub local_edge: usize,
    pub side: usize,
    /// Node ids `[start, mid, end]`.
    pub nodes: [usize; 3],
    /// Arc length at `[start, mid, end]`.
    pub s: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SideInfo {
    pub id: usize,
    pub name: String,
    /// Whether the side is a closed loop (no end points).
    pub closed: bool,
    pub length: f64,
    /// Range of this side's edges in `Mesh::boundary_edges`.
    pub edges: std::ops::Range<usize>,
}

/// Position of a boundary point along side `id`.
type SideKey = Box<dyn Fn(usize, &Point) -> f64>;

/// How boundary edges are grouped into sides and ordered along them.
pub(crate) struct SideRule {
    pub names: Vec<&'static str>,
    /// Period of the ordering key for closed sides.
    pub periods: Vec<Option<f64>>,
    pub classify: Box<dyn Fn(&Point) -> usize>,
    pub key: SideKey,
}

/// Conforming mesh of six-node triangles.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<[usize; 6]>,
    /// Sorted by side, then by arc length.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub sides: Vec<SideInfo>,
    /// Nominal element size.
    pub h: f64,
    neighbors: Vec<[usize; 3]>,
    on_boundary: Vec<bool>,
    straight: Vec<bool>,
}

impl Mesh {
    pub(crate) fn from_parts(
        nodes: Vec<Point>,
        mut elements: Vec<[usize; 6]>,
        h: f64,
        rule: &SideRule,
    ) -> Result<Self> {
        for el in &mut elements {
            let (p0, p1, p2) = (nodes[el[0]], nodes[el[1]], nodes[el[2]]);
            if (p1 - p0).perp(&(p2 - p0)) < 0.0 {
                el.swap(1, 2);
                el.swap(3, 5);
            }
        }

        let mut edge_map: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (e, el) in elements.iter().enumerate() {
            for (k, &(a, b)) in EDGE_VERTICES.iter().enumerate() {
                let key = (el[a].min(el[b]), el[a].max(el[b]));
                edge_map.entry(key).or_default().push((e, k));
            }
        }
        let mut neighbors = vec![[NONE; 3]; elements.len()];
        let mut raw_boundary = Vec::new();
        for users in edge_map.values() {
            match users.as_slice() {
                [(e, k)] => raw_boundary.push((*e, *k)),
                [(e1, k1), (e2, k2)] => {
                    if elements[*e1][3 + k1] != elements[*e2][3 + k2] {
                        return Err(Error::NonConforming(format!(
                            "elements {e1} and {e2} disagree on an edge midpoint"
                        )));
                    }
                    neighbors[*e1][*k1] = *e2;
                    neighbors[*e2][*k2] = *e1;
                }
                _ => return Err(Error::NonConforming(format!("edge shared by {} elements", users.len()))),
            }
        }

        let n_sides = rule.names.len();
        let mut per_side: Vec<Vec<(f64, BoundaryEdge)>> = vec![Vec::new(); n_sides];
        for (e, k) in raw_boundary {
            let el = &elements[e];
            let (a, b) = EDGE_VERTICES[k];
            let (va, vm, vb) = (el[a], el[3 + k], el[b]);
            let side = (rule.classify)(&nodes[vm]);
            if side >= n_sides {
                return Err(Error::NonConforming(format!("edge classified to unknown side {side}")));
            }
            let km = (rule.key)(side, &nodes[vm]);
            let rel = |v: usize| {
                let d = (rule.key)(side, &nodes[v]) - km;
                match rule.periods[side] {
                    Some(p) => d - p * (d / p).round(),
                    None => d,
                }
            };
            let (start, end) = if rel(va) < rel(vb) { (va, vb) } else { (vb, va) };
            let sort_key = match rule.periods[side] {
                Some(p) => km.rem_euclid(p),
                None => km,
            };
            per_side[side].push((
                sort_key,
                BoundaryEdge { element: e, local_edge: k, side, nodes: [start, vm, end], s: [0.0; 3] },
            ));
        }

        let mut boundary_edges = Vec::new();
        let mut sides = Vec::new();
        for (side, mut list) in per_side.into_iter().enumerate() {
            if list.is_empty() {
                return Err(Error::NonConforming(format!("side {side} has no edges")));
            }
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            let begin = boundary_edges.len();
            let mut s = 0.0;
            for (i, (_, edge)) in list.iter_mut().enumerate() {
                if i > 0 {
                    let prev_end = boundary_edges.last().map(|e: &BoundaryEdge| e.nodes[2]).unwrap();
                    if prev_end != edge.nodes[0] {
                        return Err(Error::NonConforming(format!("side {side} is not a connected chain")));
                    }
                }
                let pts = [nodes[edge.nodes[0]], nodes[edge.nodes[1]], nodes[edge.nodes[2]]];
                let half = edge_arc_length(&pts, 0.0, 0.5);
                let full = half + edge_arc_length(&pts, 0.5, 1.0);
                edge.s = [s, s + half, s + full];
                s += full;
                boundary_edges.push(edge.clone());
            }
            let closed = rule.periods[side].is_some();
            if closed && boundary_edges[begin].nodes[0] != boundary_edges.last().unwrap().nodes[2] {
                return Err(Error::NonConforming(format!("side {side} does not close")));
            }
            sides.push(SideInfo {
                id: side,
                name: rule.names[side].to_string(),
                closed,
                length: s,
                edges: begin..boundary_edges.len(),
            });
        }

        let mut on_boundary = vec![false; nodes.len()];
        for e in &boundary_edges {
            for &n in &e.nodes {
                on_boundary[n] = true;
            }
        }
        let straight = elements.iter().map(|el| element::is_straight(&gather(&nodes, el))).collect();
        let mesh = Self { nodes, elements, boundary_edges, sides, h, neighbors, on_boundary, straight };
        mesh.check_jacobians()?;
        Ok(mesh)
    }

    fn check_jacobians(&self) -> Result<()> {
        let (qp, _) = element::quadrature7();
        for e in 0..self.elements.len() {
            let c = self.element_coords(e);
            let pts = qp.iter().chain(element::NODE_REF[..3].iter());
            for r in pts {
                let det = element::jacobian(&c, &element::shape_grad(r[0], r[1])).determinant();
                if !(det > 0.0) {
                    return Err(Error::NonPositiveJacobian { element: e, det });
                }
                if self.straight[e] {
                    break;
                }
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> [Point; 6] {
        gather(&self.nodes, &self.elements[e])
    }

    pub fn is_straight(&self, e: usize) -> bool {
        self.straight[e]
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        self.on_boundary[n]
    }

    /// Neighbour across local edge `k`, if any.
    pub fn neighbor(&self, e: usize, k: usize) -> Option<usize> {
        let n = self.neighbors[e][k];
        (n != NONE).then_some(n)
    }

    pub fn side_edges(&self, side: usize) -> &[BoundaryEdge] {
        &self.boundary_edges[self.sides[side].edges.clone()]
    }

    /// Area by quadrature of the isoparametric Jacobian.
    pub fn area(&self) -> f64 {
        let (qp, qw) = element::quadrature7();
        (0..self.elements.len())
            .map(|e| {
                let c = self.element_coords(e);
                qp.iter()
                    .zip(&qw)
                    .map(|(r, w)| w * element::jacobian(&c, &element::shape_grad(r[0], r[1])).determinant())
                    .sum::<f64>()
            })
            .sum()
    }

    /// Nodes that are element vertices (not edge midpoints).
    pub fn vertex_flags(&self) -> Vec<bool> {
        let mut v = vec![false; self.nodes.len()];
        for el in &self.elements {
            for &n in &el[..3] {
                v[n] = true;
            }
        }
        v
    }

    /// Point on a boundary edge at parameter `t ∈ [0, 1]`.
    pub fn edge_point(&self, edge: &BoundaryEdge, t: f64) -> Point {
        let [p0, pm, p1] = self.edge_pts(edge);
        quad_point(&[p0, pm, p1], t)
    }

    /// Unit tangent along increasing arc length.
    pub fn edge_tangent(&self, edge: &BoundaryEdge, t: f64) -> Point {
        quad_deriv(&self.edge_pts(edge), t).normalize()
    }

    fn edge_pts(&self, edge: &BoundaryEdge) -> [Point; 3] {
        [self.nodes[edge.nodes[0]], self.nodes[edge.nodes[1]], self.nodes[edge.nodes[2]]]
    }

    /// Edge parameter at arc length `s` within the edge.
    pub fn edge_param(&self, edge: &BoundaryEdge, s: f64) -> f64 {
        let pts = self.edge_pts(edge);
        let target = (s - edge.s[0]).clamp(0.0, edge.s[2] - edge.s[0]);
        if target <= 0.0 {
            return 0.0;
        }
        if target >= edge.s[2] - edge.s[0] {
            return 1.0;
        }
        brent_root(|t| edge_arc_length(&pts, 0.0, t) - target, 0.0, 1.0, 1e-15).unwrap_or(0.5)
    }

    /// Index (within the side) of the edge containing arc length `s`.
    pub fn edge_at(&self, side: usize, s: f64) -> usize {
        let edges = self.side_edges(side);
        let idx = edges.partition_point(|e| e.s[2] < s);
        idx.min(edges.len() - 1)
    }

    pub fn point_on_side(&self, side: usize, s: f64) -> Point {
        let edge = &self.side_edges(side)[self.edge_at(side, s)];
        self.edge_point(edge, self.edge_param(edge, s))
    }

    /// Closest point of a side to `p`, as `(s, distance)`.
    pub fn project_to_side(&self, side: usize, p: &Point) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for edge in self.side_edges(side) {
            let pts = self.edge_pts(edge);
            let lo = pts.iter().map(|q| (q - p).norm()).fold(f64::INFINITY, f64::min);
            let span = (pts[2] - pts[0]).norm();
            if lo > best.1 + span {
                continue;
            }
            let (t, d2) = crate::numeric::brent_min(|t| (quad_point(&pts, t) - p).norm_squared(), 0.0, 1.0, 1e-12);
            let d = d2.sqrt();
            if d < best.1 {
                best = (edge.s[0] + edge_arc_length(&pts, 0.0, t), d);
            }
        }
        best
    }

    /// Element containing `p` and its reference coordinates, starting a walk
    /// from `hint`.
    pub fn locate(&self, p: &Point, hint: usize) -> Option<(usize, [f64; 2])> {
        let n = self.elements.len();
        let mut e = hint.min(n - 1);
        let max_steps = 4 * (n as f64).sqrt() as usize + 100;
        for _ in 0..max_steps {
            let el = &self.elements[e];
            let (p0, p1, p2) = (self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]);
            let det = (p1 - p0).perp(&(p2 - p0));
            let d = p - p0;
            let l1 = d.perp(&(p2 - p0)) / det;
            let l2 = (p1 - p0).perp(&d) / det;
            let l = [1.0 - l1 - l2, l1, l2];
            let (kmin, lmin) =
                l.iter().enumerate().fold((0, f64::INFINITY), |acc, (k, v)| if *v < acc.1 { (k, *v) } else { acc });
            if lmin >= -1e-12 {
                if let Some(r) = self.ref_coords(e, p) {
                    return Some((e, r));
                }
                break;
            }
            // Edge opposite vertex k is local edge (k + 1) % 3.
            match self.neighbor(e, (kmin + 1) % 3) {
                Some(nb) => e = nb,
                None => {
                    if let Some(r) = self.ref_coords(e, p) {
                        return Some((e, r));
                    }
                    break;
                }
            }
        }
        self.locate_brute(p)
    }

    fn ref_coords(&self, e: usize, p: &Point) -> Option<[f64; 2]> {
        let c = self.element_coords(e);
        element::invert(&c, p).filter(|r| element::ref_inside(*r, 1e-9))
    }

    fn locate_brute(&self, p: &Point) -> Option<(usize, [f64; 2])> {
        (0..self.elements.len()).find_map(|e| {
            let c = self.element_coords(e);
            let (mut lo, mut hi) = (c[0], c[0]);
            for q in &c[1..] {
                lo = lo.inf(q);
                hi = hi.sup(q);
            }
            let pad = 1e-9 * (hi - lo).norm() + 1e-14;
            if p.x < lo.x - pad || p.y < lo.y - pad || p.x > hi.x + pad || p.y > hi.y + pad {
                return None;
            }
            self.ref_coords(e, p).map(|r| (e, r))
        })
    }

    /// Plain-text export: header `N_nodes N_elems N_bedges`, then node lines
    /// `id x y`, element lines `id n1..n6` and boundary lines
    /// `elem edge side s0 s1`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.nodes.len(), self.elements.len(), self.boundary_edges.len())?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(w, "{i} {:?} {:?}", p.x, p.y)?;
        }
        for (i, el) in self.elements.iter().enumerate() {
            writeln!(w, "{i} {} {} {} {} {} {}", el[0], el[1], el[2], el[3], el[4], el[5])?;
        }
        for e in &self.boundary_edges {
            writeln!(w, "{} {} {} {:?} {:?}", e.element, e.local_edge, e.side, e.s[0], e.s[2])?;
        }
        Ok(())
    }
}

fn gather(nodes: &[Point], el: &[usize; 6]) -> [Point; 6] {
    [nodes[el[0]], nodes[el[1]], nodes[el[2]], nodes[el[3]], nodes[el[4]], nodes[el[5]]]
}

/// Quadratic curve through `p0` (t = 0), `pm` (t = 1/2), `p1` (t = 1).
pub(crate) fn quad_point(p: &[Point; 3], t: f64) -> Point {
    p[0] * ((1.0 - t) * (1.0 - 2.0 * t)) + p[1] * (4.0 * t * (1.0 - t)) + p[2] * (t * (2.0 * t - 1.0))
}

pub(crate) fn quad_deriv(p: &[Point; 3], t: f64) -> Point {
    p[0] * (4.0 * t - 3.0) + p[1] * (4.0 - 8.0 * t) + p[2] * (4.0 * t - 1.0)
}

/// Arc length of the quadratic curve between parameters `t0` and `t1`.
pub(crate) fn edge_arc_length(p: &[Point; 3], t0: f64, t1: f64) -> f64 {
    let (x, w) = gauss_legendre_5();
    let mut total = 0.0;
    const PIECES: usize = 2;
    for k in 0..PIECES {
        let a = t0 + (t1 - t0) * k as f64 / PIECES as f64;
        let b = t0 + (t1 - t0) * (k + 1) as f64 / PIECES as f64;
        total += (b - a) * x.iter().zip(&w).map(|(x, w)| w * quad_deriv(p, a + (b - a) * x).norm()).sum::<f64>();
    }
    total
}
