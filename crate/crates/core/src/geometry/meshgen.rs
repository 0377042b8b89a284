use std::collections::HashMap;
use std::f64::consts::PI;

use super::mesh::{Mesh, SideRule};
use super::{DomainSpec, NarrowSpec, Point};
use crate::error::{Error, Result};

/// Mesh a domain with nominal element size `h`.
pub fn build_mesh(spec: &DomainSpec, h: f64) -> Result<Mesh> {
    spec.validate()?;
    if !(h > 0.0 && h < spec.diameter()) {
        return Err(Error::InvalidArgument(format!("mesh size {h} must lie in (0, {})", spec.diameter())));
    }
    match spec {
        DomainSpec::Triangle { a, b, c } => {
            let lens = [(b - a).norm(), (c - b).norm(), (a - c).norm()];
            let mut sorted = lens;
            sorted.sort_by(f64::total_cmp);
            let mut n = 1usize;
            while sorted[1] / n as f64 > h * (1.0 + 1e-12) {
                n *= 2;
            }
            triangle_mesh(*a, *b, *c, n)
        }
        DomainSpec::Narrow(ns) => {
            let fibers = ns.max_gap() / h;
            if fibers < 4.0 {
                return Err(Error::UnderResolved { fibers });
            }
            let nx = even(((ns.b - ns.a) / h).ceil() as usize);
            let ny = even((fibers.ceil() as usize).max(8));
            narrow_mesh(ns, nx, ny)
        }
        DomainSpec::Rectangle { eps } => {
            let nx = even((1.0 / h).ceil() as usize);
            let ny = even(((2.0 * eps) / h).ceil() as usize);
            rectangle_mesh(*eps, nx, ny)
        }
        DomainSpec::Ellipse { a_semi, b_semi } => {
            let rings = ((a_semi.max(*b_semi) / h).ceil() as usize).max(4);
            ellipse_mesh(*a_semi, *b_semi, rings)
        }
        DomainSpec::Annulus { rho1, rho2, offset } => {
            let nth = even((2.0 * PI * rho1 / h).ceil() as usize).max(16);
            let nr = ((rho1 - rho2) / h).ceil().max(4.0) as usize;
            annulus_mesh(*rho1, *rho2, *offset, nth, nr)
        }
    }
}

fn even(n: usize) -> usize {
    n.max(2) + n % 2
}

/// Uniform refinement of triangle `abc` into `n^2` straight sub-triangles.
/// Sides: 0 = AB, 1 = BC, 2 = CA, arc length measured from the first vertex.
pub fn triangle_mesh(a: Point, b: Point, c: Point, n: usize) -> Result<Mesh> {
    let m = 2 * n;
    let mut index = HashMap::new();
    let mut nodes = Vec::new();
    let mut id = |i: usize, j: usize, nodes: &mut Vec<Point>| -> usize {
        *index.entry((i, j)).or_insert_with(|| {
            let (u, v) = (i as f64 / m as f64, j as f64 / m as f64);
            nodes.push(a + (b - a) * u + (c - a) * v);
            nodes.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(n * n);
    let mut tri = |p: [(usize, usize); 3], nodes: &mut Vec<Point>| {
        let mid = |x: (usize, usize), y: (usize, usize)| ((x.0 + y.0) / 2, (x.1 + y.1) / 2);
        let all = [p[0], p[1], p[2], mid(p[0], p[1]), mid(p[1], p[2]), mid(p[2], p[0])];
        let mut el = [0usize; 6];
        for (k, q) in all.iter().enumerate() {
            el[k] = id(q.0, q.1, nodes);
        }
        elements.push(el);
    };
    for j in 0..n {
        for i in 0..(n - j) {
            let (i0, j0) = (2 * i, 2 * j);
            tri([(i0, j0), (i0 + 2, j0), (i0, j0 + 2)], &mut nodes);
            if i + j + 1 < n {
                tri([(i0 + 2, j0), (i0 + 2, j0 + 2), (i0, j0 + 2)], &mut nodes);
            }
        }
    }
    let verts = [a, b, c];
    let lens = [(b - a).norm(), (c - b).norm(), (a - c).norm()];
    let mut sorted = lens;
    sorted.sort_by(f64::total_cmp);
    let rule = SideRule {
        names: vec!["AB", "BC", "CA"],
        periods: vec![None; 3],
        classify: Box::new(move |p| {
            (0..3)
                .map(|k| {
                    let (s, e) = (verts[k], verts[(k + 1) % 3]);
                    ((e - s).perp(&(p - s)) / (e - s).norm()).abs()
                })
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap()
                .0
        }),
        key: Box::new(move |k, p| {
            let (s, e) = (verts[k], verts[(k + 1) % 3]);
            (p - s).dot(&(e - s)) / (e - s).norm()
        }),
    };
    Mesh::from_parts(nodes, elements, sorted[1] / n as f64, &rule)
}

/// Structured grid over `(ξ, η) ∈ [0,1]²` mapped into the plane.
struct MappedGrid<'a> {
    nxi: usize,
    neta: usize,
    collapse_left: bool,
    collapse_right: bool,
    periodic: bool,
    map: &'a dyn Fn(f64, f64) -> Point,
}

impl MappedGrid<'_> {
    fn build(&self) -> (Vec<Point>, Vec<[usize; 6]>) {
        let (mx, my) = (2 * self.nxi, 2 * self.neta);
        let collapsed = |i: usize| (i == 0 && self.collapse_left) || (i == mx && self.collapse_right);
        let canonical = |i: usize, j: usize| {
            let i = if self.periodic && i == mx { 0 } else { i };
            let j = if collapsed(i) { 0 } else { j };
            (i, j)
        };
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut node = |i: usize, j: usize, nodes: &mut Vec<Point>| -> usize {
            let key = canonical(i, j);
            *index.entry(key).or_insert_with(|| {
                nodes.push((self.map)(key.0 as f64 / mx as f64, key.1 as f64 / my as f64));
                nodes.len() - 1
            })
        };
        // Midpoint of an edge touching a collapsed fibre follows the fibre of
        // the other end, so neighbouring fan triangles share it.
        let mid = |p: (usize, usize), q: (usize, usize)| {
            let i = (p.0 + q.0) / 2;
            let j = if collapsed(p.0) {
                q.1
            } else if collapsed(q.0) {
                p.1
            } else {
                (p.1 + q.1) / 2
            };
            (i, j)
        };
        let mut elements = Vec::new();
        for c in 0..self.nxi {
            for r in 0..self.neta {
                let (i0, j0) = (2 * c, 2 * r);
                let flip = (2 * c + 1 > self.nxi) ^ (2 * r + 1 > self.neta);
                let tris = if flip {
                    [[(i0, j0), (i0 + 2, j0), (i0, j0 + 2)], [(i0 + 2, j0), (i0 + 2, j0 + 2), (i0, j0 + 2)]]
                } else {
                    [[(i0, j0), (i0 + 2, j0), (i0 + 2, j0 + 2)], [(i0, j0), (i0 + 2, j0 + 2), (i0, j0 + 2)]]
                };
                for t in tris {
                    let v = [canonical(t[0].0, t[0].1), canonical(t[1].0, t[1].1), canonical(t[2].0, t[2].1)];
                    if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                        continue;
                    }
                    let all = [t[0], t[1], t[2], mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0])];
                    let mut el = [0usize; 6];
                    for (k, q) in all.iter().enumerate() {
                        el[k] = node(q.0, q.1, &mut nodes);
                    }
                    elements.push(el);
                }
            }
        }
        (nodes, elements)
    }
}

/// Thin-domain mesh with `nx` columns and `ny` fibres; all nodes lie on the
/// map `y = eps f1 + eps (f2 - f1) η`. Side 0 is the lower graph, side 1 the
/// upper graph, both parametrized from `x = a`.
pub fn narrow_mesh(spec: &NarrowSpec, nx: usize, ny: usize) -> Result<Mesh> {
    spec.validate()?;
    if ny < 8 || nx < 2 {
        return Err(Error::InvalidArgument(format!("narrow mesh needs nx >= 2 and ny >= 8, got {nx} x {ny}")));
    }
    let s = spec.clone();
    let map = move |xi: f64, eta: f64| {
        let x = s.a + (s.b - s.a) * xi;
        let (lo, hi) = s.bounds(x);
        Point::new(x, lo + (hi - lo) * eta)
    };
    let grid = MappedGrid { nxi: nx, neta: ny, collapse_left: true, collapse_right: true, periodic: false, map: &map };
    let (nodes, elements) = grid.build();
    let s = spec.clone();
    let rule = SideRule {
        names: vec!["lower", "upper"],
        periods: vec![None; 2],
        classify: Box::new(move |p| {
            let (lo, hi) = s.bounds(p.x);
            usize::from(p.y > 0.5 * (lo + hi))
        }),
        key: Box::new(|_, p| p.x),
    };
    let hx = (spec.b - spec.a) / nx as f64;
    let hy = spec.max_gap() / ny as f64;
    Mesh::from_parts(nodes, elements, hx.max(hy), &rule)
}

/// `[0,1] x [-eps, eps]`; sides 0..4 = bottom, right, top, left, each traversed
/// counter-clockwise.
pub fn rectangle_mesh(eps: f64, nx: usize, ny: usize) -> Result<Mesh> {
    let map = move |xi: f64, eta: f64| Point::new(xi, -eps + 2.0 * eps * eta);
    let grid =
        MappedGrid { nxi: nx, neta: ny, collapse_left: false, collapse_right: false, periodic: false, map: &map };
    let (nodes, elements) = grid.build();
    let rule = SideRule {
        names: vec!["bottom", "right", "top", "left"],
        periods: vec![None; 4],
        classify: Box::new(move |p| {
            let d = [(p.y + eps).abs(), (p.x - 1.0).abs(), (p.y - eps).abs(), p.x.abs()];
            (0..4).min_by(|a, b| d[*a].total_cmp(&d[*b])).unwrap()
        }),
        key: Box::new(|k, p| match k {
            0 => p.x,
            1 => p.y,
            2 => -p.x,
            _ => -p.y,
        }),
    };
    Mesh::from_parts(nodes, elements, (1.0 / nx as f64).max(2.0 * eps / ny as f64), &rule)
}

/// Ellipse mesh from concentric rings of the unit disk (ring `k` carries
/// `6k` vertices at uniform angles) scaled by `(a, b)`. Boundary mid-edge
/// nodes sit on the ellipse at the mean angle. Side 0 is the lower arc,
/// side 1 the upper arc, both from `(-a, 0)` to `(a, 0)`.
pub fn ellipse_mesh(a: f64, b: f64, n_rings: usize) -> Result<Mesh> {
    if n_rings < 2 {
        return Err(Error::InvalidArgument(format!("ellipse mesh needs at least 2 rings, got {n_rings}")));
    }
    let n = n_rings;
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };
    let count = |k: usize| if k == 0 { 1 } else { 6 * k };
    let angle = |k: usize, j: usize| 2.0 * PI * j as f64 / count(k) as f64;
    let mut nodes = Vec::with_capacity(1 + 3 * n * (n + 1));
    let mut polar = Vec::with_capacity(nodes.capacity());
    for k in 0..=n {
        let r = k as f64 / n as f64;
        for j in 0..count(k) {
            let th = angle(k, j);
            polar.push((k, th));
            nodes.push(Point::new(a * r * th.cos(), b * r * th.sin()));
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(6 * n * n);
    for j in 0..6 {
        tris.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for k in 2..=n {
        let (ni, no) = (count(k - 1), count(k));
        let (si, so) = (ring_start(k - 1), ring_start(k));
        let (mut i, mut j) = (0usize, 0usize);
        while i < ni || j < no {
            let next_in = (i + 1) as f64 / ni as f64;
            let next_out = (j + 1) as f64 / no as f64;
            if j < no && (i == ni || next_out <= next_in) {
                tris.push([si + i % ni, so + j, so + (j + 1) % no]);
                j += 1;
            } else {
                tris.push([si + i % ni, so + j % no, si + (i + 1) % ni]);
                i += 1;
            }
        }
    }
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::with_capacity(tris.len());
    for t in tris {
        let mut el = [t[0], t[1], t[2], 0, 0, 0];
        for k in 0..3 {
            let (p, q) = (t[k], t[(k + 1) % 3]);
            let key = (p.min(q), p.max(q));
            el[3 + k] = *mids.entry(key).or_insert_with(|| {
                let (kp, tp) = polar[p];
                let (kq, tq) = polar[q];
                let m = if kp == n && kq == n {
                    let mut d = tq - tp;
                    if d > PI {
                        d -= 2.0 * PI;
                    } else if d < -PI {
                        d += 2.0 * PI;
                    }
                    let th = tp + 0.5 * d;
                    Point::new(a * th.cos(), b * th.sin())
                } else {
                    (nodes[p] + nodes[q]) * 0.5
                };
                nodes.push(m);
                nodes.len() - 1
            });
        }
        elements.push(el);
    }
    let rule = SideRule {
        names: vec!["lower", "upper"],
        periods: vec![None; 2],
        classify: Box::new(|p| usize::from(p.y > 0.0)),
        key: Box::new(|_, p| p.x),
    };
    let h = 2.0 * PI * a.max(b) / (6 * n) as f64;
    Mesh::from_parts(nodes, elements, h.max(a.max(b) / n as f64), &rule)
}

/// Exponential grading of the radial spacing toward the inner circle, where
/// the torsion function has its largest higher derivatives.
const ANNULUS_GRADING: f64 = 2.0;

/// Annulus mesh by transfinite blending between the inner circle (centre
/// `(offset, 0)`) and the outer circle along rays of common angle θ, with
/// radial spacing graded toward the inner circle.
/// Side 0 is the outer circle, side 1 the inner one; both start at θ = 0 and
/// run counter-clockwise.
pub fn annulus_mesh(rho1: f64, rho2: f64, offset: f64, nth: usize, nr: usize) -> Result<Mesh> {
    let map = move |xi: f64, eta: f64| {
        let th = 2.0 * PI * xi;
        let dir = Point::new(th.cos(), th.sin());
        let inner = Point::new(offset, 0.0) + dir * rho2;
        let outer = dir * rho1;
        let graded = (ANNULUS_GRADING * eta).exp_m1() / ANNULUS_GRADING.exp_m1();
        inner + (outer - inner) * graded
    };
    let grid =
        MappedGrid { nxi: nth, neta: nr, collapse_left: false, collapse_right: false, periodic: true, map: &map };
    let (nodes, elements) = grid.build();
    let centre = Point::new(offset, 0.0);
    let rule = SideRule {
        names: vec!["outer", "inner"],
        periods: vec![Some(2.0 * PI); 2],
        classify: Box::new(move |p| usize::from((p.norm() - rho1).abs() > ((p - centre).norm() - rho2).abs())),
        key: Box::new(move |k, p| {
            let q = if k == 0 { *p } else { p - centre };
            q.y.atan2(q.x).rem_euclid(2.0 * PI)
        }),
    };
    let h = (2.0 * PI * rho1 / nth as f64).max((rho1 - rho2 + offset.abs()) / nr as f64);
    Mesh::from_parts(nodes, elements, h, &rule)
}
