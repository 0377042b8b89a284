//! Six-node quadratic triangle on the reference element `{ξ, η ≥ 0, ξ + η ≤ 1}`.
//!
//! Local nodes 0, 1, 2 are the vertices `(0,0)`, `(1,0)`, `(0,1)`; nodes 3, 4, 5
//! are the midpoints of the edges 0–1, 1–2 and 2–0. Local edge `k` joins
//! vertices `k` and `(k + 1) % 3` and carries midpoint node `3 + k`.

use nalgebra::Matrix2;

use super::Point;

/// Vertex pair `(start, end)` of each local edge.
pub const EDGE_VERTICES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn shape(xi: f64, eta: f64) -> [f64; 6] {
    let l0 = 1.0 - xi - eta;
    let (l1, l2) = (xi, eta);
    [l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), 4.0 * l0 * l1, 4.0 * l1 * l2, 4.0 * l2 * l0]
}

/// Reference gradients `(∂/∂ξ, ∂/∂η)` of the six shape functions.
pub fn shape_grad(xi: f64, eta: f64) -> [[f64; 2]; 6] {
    let l0 = 1.0 - xi - eta;
    let (l1, l2) = (xi, eta);
    let d0 = -(4.0 * l0 - 1.0);
    [
        [d0, d0],
        [4.0 * l1 - 1.0, 0.0],
        [0.0, 4.0 * l2 - 1.0],
        [4.0 * (l0 - l1), -4.0 * l1],
        [4.0 * l2, 4.0 * l1],
        [-4.0 * l2, 4.0 * (l0 - l2)],
    ]
}

/// Reference coordinates of the six local nodes.
pub const NODE_REF: [[f64; 2]; 6] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

/// Seven-point rule, exact for degree 5. Weights sum to the reference area 1/2.
pub fn quadrature7() -> ([[f64; 2]; 7], [f64; 7]) {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let b1 = (9.0 + 2.0 * s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let b2 = (9.0 - 2.0 * s15) / 21.0;
    let w0 = 9.0 / 80.0;
    let w1 = (155.0 - s15) / 2400.0;
    let w2 = (155.0 + s15) / 2400.0;
    ([[1.0 / 3.0, 1.0 / 3.0], [a1, a1], [b1, a1], [a1, b1], [a2, a2], [b2, a2], [a2, b2]], [w0, w1, w1, w1, w2, w2, w2])
}

pub fn map_point(coords: &[Point; 6], xi: f64, eta: f64) -> Point {
    let n = shape(xi, eta);
    coords.iter().zip(n).fold(Point::zeros(), |acc, (p, w)| acc + p * w)
}

/// `J[(i, j)] = ∂x_i / ∂ξ_j`.
pub fn jacobian(coords: &[Point; 6], grads: &[[f64; 2]; 6]) -> Matrix2<f64> {
    let mut j = Matrix2::zeros();
    for (p, g) in coords.iter().zip(grads) {
        j[(0, 0)] += p.x * g[0];
        j[(0, 1)] += p.x * g[1];
        j[(1, 0)] += p.y * g[0];
        j[(1, 1)] += p.y * g[1];
    }
    j
}

/// Whether the midpoints sit at the averages of their edge vertices.
pub fn is_straight(coords: &[Point; 6]) -> bool {
    let scale = (coords[1] - coords[0]).norm().max((coords[2] - coords[0]).norm());
    EDGE_VERTICES
        .iter()
        .enumerate()
        .all(|(k, &(a, b))| (coords[3 + k] - 0.5 * (coords[a] + coords[b])).norm() <= 1e-12 * scale)
}

/// Inverse isoparametric map by Newton iteration from the affine guess.
/// Returns reference coordinates when the iteration converges.
pub fn invert(coords: &[Point; 6], p: &Point) -> Option<[f64; 2]> {
    let e1 = coords[1] - coords[0];
    let e2 = coords[2] - coords[0];
    let det = e1.perp(&e2);
    if det == 0.0 {
        return None;
    }
    let d = p - coords[0];
    let mut xi = d.perp(&e2) / det;
    let mut eta = e1.perp(&d) / det;
    if is_straight(coords) {
        return Some([xi, eta]);
    }
    let scale = e1.norm().max(e2.norm());
    for _ in 0..30 {
        let r = map_point(coords, xi, eta) - p;
        if r.norm() <= 1e-14 * scale {
            return Some([xi, eta]);
        }
        let j = jacobian(coords, &shape_grad(xi, eta));
        let step = j.try_inverse()? * r;
        xi -= step.x;
        eta -= step.y;
        if !xi.is_finite() || !eta.is_finite() || xi.abs() > 10.0 || eta.abs() > 10.0 {
            return None;
        }
    }
    let r = map_point(coords, xi, eta) - p;
    (r.norm() <= 1e-10 * scale).then_some([xi, eta])
}

/// Whether reference coordinates lie in the closed reference triangle up to `tol`.
pub fn ref_inside(r: [f64; 2], tol: f64) -> bool {
    r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_functions_are_nodal() {
        for (a, r) in NODE_REF.iter().enumerate() {
            let n = shape(r[0], r[1]);
            for (b, v) in n.iter().enumerate() {
                assert!((v - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_match_differences() {
        let (x, y, h) = (0.21, 0.37, 1e-6);
        let g = shape_grad(x, y);
        let (px, mx) = (shape(x + h, y), shape(x - h, y));
        let (py, my) = (shape(x, y + h), shape(x, y - h));
        for k in 0..6 {
            assert!(((px[k] - mx[k]) / (2.0 * h) - g[k][0]).abs() < 1e-9);
            assert!(((py[k] - my[k]) / (2.0 * h) - g[k][1]).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_is_degree_five() {
        let (pts, w) = quadrature7();
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = pts.iter().zip(&w).map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-15, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn newton_inverts_curved_map() {
        let mut c = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, -0.05),
            Point::new(0.55, 0.55),
            Point::new(0.0, 0.5),
        ];
        let p = map_point(&c, 0.3, 0.4);
        let r = invert(&c, &p).unwrap();
        assert!((r[0] - 0.3).abs() < 1e-12 && (r[1] - 0.4).abs() < 1e-12);
        c[3] = Point::new(0.5, 0.0);
        c[4] = Point::new(0.5, 0.5);
        assert!(is_straight(&c));
    }
}
