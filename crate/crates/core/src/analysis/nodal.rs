use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::profile::{smoothed_slopes, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::fem::{boundary_flux, BoundaryFlux, TorsionSolution};
use crate::geometry::element::{EDGE_VERTICES, NODE_REF};
use crate::geometry::{Mesh, Point};
use crate::numeric::linear_fit;

/// Endpoints closer than this many mesh sizes to a corner snap to it.
const CORNER_SNAP: f64 = 3.0;
/// Paths shorter than this many mesh sizes are discarded.
const MIN_PATH_LENGTH: f64 = 2.0;
/// Points used for the boundary tangent fit.
const TANGENT_POINTS: usize = 5;

/// Crossed mesh edges (as vertex pairs) of a traced path and the elements it passes.
type RawPath = (Vec<(usize, usize)>, Vec<usize>);

/// Classification of a nodal-path endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PathEnd {
    /// On a side, away from its end points.
    Side { side_id: usize, s: f64 },
    /// At (within snapping distance of) a corner of the domain.
    Vertex { point: Point },
    /// Inside the domain (closed loops start and end here).
    Interior { point: Point },
}

/// Polyline through the zero set of a directional derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalPath {
    pub points: Vec<Point>,
    /// Element crossed by each segment.
    pub elements: Vec<usize>,
    pub start: PathEnd,
    pub end: PathEnd,
}

impl NodalPath {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Largest distance of the polyline from the line through `origin`
    /// along `direction`.
    pub fn max_deviation(&self, origin: Point, direction: Point) -> f64 {
        let d = direction.normalize();
        self.points.iter().map(|p| (p - origin).perp(&d).abs()).fold(0.0, f64::max)
    }

    pub fn ends_on_side(&self) -> Option<(usize, f64)> {
        match self.start {
            PathEnd::Side { side_id, s } => Some((side_id, s)),
            _ => None,
        }
    }
}

/// Boundary chord (pair of element vertices) with its side and arc lengths.
struct Chord {
    side: usize,
    s: [f64; 2],
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Inward unit normal of a boundary edge at parameter `t`.
fn inward_normal(mesh: &Mesh, edge: &crate::geometry::BoundaryEdge, t: f64) -> (Point, Point) {
    let tau = mesh.edge_tangent(edge, t);
    let p = mesh.edge_point(edge, t);
    let el = &mesh.elements[edge.element];
    let centroid = (mesh.nodes[el[0]] + mesh.nodes[el[1]] + mesh.nodes[el[2]]) / 3.0;
    let left = Point::new(-tau.y, tau.x);
    let n = if (centroid - p).dot(&left) >= 0.0 { left } else { -left };
    (tau, n)
}

/// Values of `direction · ∇u` at the element vertices.
///
/// Interior vertices average the element gradients. Boundary vertices use
/// the recovered flux `g`: `g (γ·n) + δ (γ·τ) g'(s)` with `δ = h/2`, which
/// keeps the sign information on sides where `γ·n = 0`; `g'` is a smoothed
/// slope of the nodal flux. Corners take the mean of their neighbours.
fn vertex_values(sol: &TorsionSolution, flux: &BoundaryFlux, direction: Point) -> Result<Vec<Option<f64>>> {
    let mesh = &sol.mesh;
    let n = mesh.n_nodes();
    let mut sum = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (e, el) in mesh.elements.iter().enumerate() {
        for k in 0..3 {
            if !mesh.is_boundary_node(el[k]) {
                sum[el[k]] += direction.dot(&sol.element_gradient(e, NODE_REF[k]));
                count[el[k]] += 1;
            }
        }
    }
    let mut values: Vec<Option<f64>> = (0..n).map(|i| (count[i] > 0).then(|| sum[i] / count[i] as f64)).collect();
    let delta = 0.5 * mesh.h;
    let mut corner = vec![false; n];
    let mut slope_at = vec![0.0; n];
    for info in &mesh.sides {
        let samples = flux.side_samples(info.id);
        let arc: Vec<f64> = samples.iter().map(|p| p.s).collect();
        let g: Vec<f64> = samples.iter().map(|p| p.dudn).collect();
        if arc.len() >= MIN_SAMPLES {
            for (p, d) in samples.iter().zip(smoothed_slopes(&arc, info.length, info.closed, &g)?) {
                slope_at[p.node] = d;
            }
        }
    }
    for info in &mesh.sides {
        let edges = mesh.side_edges(info.id);
        for (idx, edge) in edges.iter().enumerate() {
            for (end, t) in [(0usize, 0.0), (2usize, 1.0)] {
                let node = edge.nodes[end];
                let at_side_end = !info.closed && ((idx == 0 && end == 0) || (idx + 1 == edges.len() && end == 2));
                if at_side_end {
                    corner[node] = true;
                    continue;
                }
                if values[node].is_some() {
                    continue;
                }
                let (tau, nrm) = inward_normal(mesh, edge, t);
                let g = flux.at_node(node);
                let dg = slope_at[node];
                values[node] = Some(g * direction.dot(&nrm) + delta * direction.dot(&tau) * dg);
            }
        }
    }
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    for el in &mesh.elements {
        for &(a, b) in &EDGE_VERTICES {
            for (p, q) in [(el[a], el[b]), (el[b], el[a])] {
                if corner[p] {
                    adjacency.entry(p).or_default().push(q);
                }
            }
        }
    }
    for (c, nbrs) in adjacency {
        let vals: Vec<f64> = nbrs.iter().filter(|q| !corner[**q]).filter_map(|q| values[*q]).collect();
        if !vals.is_empty() {
            values[c] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    Ok(values)
}

/// Zero set of `direction · ∇u`, as polylines through the mesh.
pub fn trace_nodal_line(solution: &TorsionSolution, direction: Point) -> Result<Vec<NodalPath>> {
    let flux = boundary_flux(solution)?;
    trace_nodal_line_with_flux(solution, &flux, direction)
}

/// As [`trace_nodal_line`], reusing a recovered boundary flux.
pub fn trace_nodal_line_with_flux(
    solution: &TorsionSolution,
    flux: &BoundaryFlux,
    direction: Point,
) -> Result<Vec<NodalPath>> {
    if !((direction.norm() - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidArgument(format!("direction must be a unit vector, got {direction:?}")));
    }
    let mesh = &solution.mesh;
    let values = vertex_values(solution, flux, direction)?;
    let value = |i: usize| values[i].unwrap_or(0.0);
    let positive = |i: usize| value(i) >= 0.0;

    let mut chords: HashMap<(usize, usize), Chord> = HashMap::new();
    for edge in &mesh.boundary_edges {
        chords.insert(key(edge.nodes[0], edge.nodes[2]), Chord { side: edge.side, s: [edge.s[0], edge.s[2]] });
    }
    let crossing = |a: usize, b: usize| -> Point {
        let (va, vb) = (value(a), value(b));
        let t = va / (va - vb);
        mesh.nodes[a] + (mesh.nodes[b] - mesh.nodes[a]) * t
    };

    // One segment per element whose vertex signs differ.
    let mut segments: Vec<(usize, [(usize, usize); 2])> = Vec::new();
    let mut by_key: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        let cut: Vec<(usize, usize)> = EDGE_VERTICES
            .iter()
            .filter(|&&(a, b)| positive(el[a]) != positive(el[b]))
            .map(|&(a, b)| key(el[a], el[b]))
            .collect();
        if cut.len() == 2 {
            let id = segments.len();
            segments.push((e, [cut[0], cut[1]]));
            for k in &cut {
                by_key.entry(*k).or_default().push(id);
            }
        }
    }

    let mut used = vec![false; segments.len()];
    let mut raw_paths: Vec<RawPath> = Vec::new();
    let walk = |start_seg: usize, start_key: (usize, usize), used: &mut Vec<bool>| {
        let mut keys = vec![start_key];
        let mut elems = Vec::new();
        let mut seg = start_seg;
        let mut at = start_key;
        loop {
            used[seg] = true;
            elems.push(segments[seg].0);
            let [k0, k1] = segments[seg].1;
            let next = if k0 == at { k1 } else { k0 };
            keys.push(next);
            at = next;
            match by_key[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => break,
            }
        }
        (keys, elems)
    };
    // Open paths start on boundary chords; what remains are closed loops.
    let mut starts: Vec<((usize, usize), usize)> = by_key
        .iter()
        .filter(|(k, segs)| segs.len() == 1 && chords.contains_key(*k))
        .map(|(k, segs)| (*k, segs[0]))
        .collect();
    starts.sort_unstable();
    for (k, seg) in starts {
        if !used[seg] {
            raw_paths.push(walk(seg, k, &mut used));
        }
    }
    for seg in 0..segments.len() {
        if !used[seg] {
            let k = segments[seg].1[0];
            raw_paths.push(walk(seg, k, &mut used));
        }
    }

    let classify = |k: &(usize, usize), p: Point| -> PathEnd {
        match chords.get(k) {
            Some(ch) => {
                let (a, b) = *k;
                let (va, vb) = (value(a), value(b));
                let t = va / (va - vb);
                // Chord endpoints follow the side orientation; map `t` accordingly.
                let first_is_a = mesh.side_edges(ch.side).iter().any(|e| e.nodes[0] == a && e.nodes[2] == b);
                let tt = if first_is_a { t } else { 1.0 - t };
                let s = ch.s[0] + (ch.s[1] - ch.s[0]) * tt;
                let info = &mesh.sides[ch.side];
                let snap = CORNER_SNAP * mesh.h;
                if !info.closed && s < snap {
                    PathEnd::Vertex { point: mesh.point_on_side(ch.side, 0.0) }
                } else if !info.closed && s > info.length - snap {
                    PathEnd::Vertex { point: mesh.point_on_side(ch.side, info.length) }
                } else {
                    PathEnd::Side { side_id: ch.side, s }
                }
            }
            None => PathEnd::Interior { point: p },
        }
    };
    let mut out = Vec::new();
    for (keys, elems) in raw_paths {
        let points: Vec<Point> = keys.iter().map(|&(a, b)| crossing(a, b)).collect();
        let mut path = NodalPath {
            start: classify(&keys[0], points[0]),
            end: classify(keys.last().unwrap(), *points.last().unwrap()),
            points,
            elements: elems,
        };
        if path.length() < MIN_PATH_LENGTH * mesh.h {
            continue;
        }
        let side_first = |e: &PathEnd| matches!(e, PathEnd::Side { .. });
        if side_first(&path.end) && !side_first(&path.start) {
            path.points.reverse();
            path.elements.reverse();
            std::mem::swap(&mut path.start, &mut path.end);
        }
        out.push(path);
    }
    Ok(out)
}

/// Points at arc lengths `0, h, 2h, ...` along a polyline.
fn resample(points: &[Point], h: f64, count: usize) -> Vec<Point> {
    let mut out = vec![points[0]];
    let mut walked = 0.0;
    let mut target = h;
    for w in points.windows(2) {
        let len = (w[1] - w[0]).norm();
        while out.len() < count && walked + len >= target && len > 0.0 {
            out.push(w[0] + (w[1] - w[0]) * ((target - walked) / len));
            target += h;
        }
        walked += len;
    }
    out
}

/// Angle in degrees between the path's tangent at its side end and the side
/// normal there. The tangent is a least-squares line through the first
/// points of the path resampled at spacing `h`, which removes the zigzag of
/// the element-by-element crossings.
pub fn nodal_tangent_angle_at_boundary(path: &NodalPath, mesh: &Mesh) -> Result<f64> {
    let (side, s) = path.ends_on_side().ok_or_else(|| Error::NotFound("path does not start on a side".into()))?;
    let pts = resample(&path.points, mesh.h, TANGENT_POINTS);
    if pts.len() < TANGENT_POINTS {
        return Err(Error::TooFewSamples { side, count: pts.len(), required: TANGENT_POINTS });
    }
    let edge = &mesh.side_edges(side)[mesh.edge_at(side, s)];
    let (tau, nrm) = inward_normal(mesh, edge, mesh.edge_param(edge, s));
    // Fit the offset along the tangent as a function of the normal coordinate.
    let base = pts[0];
    let xn: Vec<f64> = pts.iter().map(|p| (p - base).dot(&nrm)).collect();
    let xt: Vec<f64> = pts.iter().map(|p| (p - base).dot(&tau)).collect();
    let (slope, _) = linear_fit(&xn, &xt);
    Ok(slope.atan().abs().to_degrees())
}

/// CSV `path_id,k,x,y`.
pub fn write_paths_csv<W: std::io::Write>(paths: &[NodalPath], mut w: W) -> std::io::Result<()> {
    writeln!(w, "path_id,k,x,y")?;
    for (i, path) in paths.iter().enumerate() {
        for (k, p) in path.points.iter().enumerate() {
            writeln!(w, "{i},{k},{:?},{:?}", p.x, p.y)?;
        }
    }
    Ok(())
}
