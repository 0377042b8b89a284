use serde::{Deserialize, Serialize};

use super::{Point, PolyBoundaryFn};
use crate::error::{Error, Result};

/// Midpoint and altitude foot on the longest side of a triangle.
///
/// Side ids follow the triangle mesh: 0 = AB, 1 = BC, 2 = CA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleLandmarks {
    pub longest_side_id: usize,
    pub side_lengths: [f64; 3],
    pub midpoint: Point,
    pub altitude_foot: Point,
    pub opposite_vertex: Point,
    /// Arc length of `M` and `F` measured from the start vertex of the longest side.
    pub s_midpoint: f64,
    pub s_foot: f64,
}

impl TriangleLandmarks {
    /// Whether side `k` is a longest side (ties included).
    pub fn is_longest(&self, k: usize) -> bool {
        let max = self.side_lengths.iter().cloned().fold(0.0, f64::max);
        self.side_lengths[k] >= max * (1.0 - 1e-12)
    }
}

pub fn triangle_landmarks(a: Point, b: Point, c: Point) -> Result<TriangleLandmarks> {
    let v = [a, b, c];
    let lens = [(b - a).norm(), (c - b).norm(), (a - c).norm()];
    let scale = lens.iter().cloned().fold(0.0, f64::max);
    if (b - a).perp(&(c - a)).abs() <= 1e-12 * scale * scale {
        return Err(Error::InvalidSpec("triangle vertices are collinear".into()));
    }
    let mut k = 0;
    for j in 1..3 {
        if lens[j] > lens[k] {
            k = j;
        }
    }
    let (s, e, o) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
    let dir = (e - s) / lens[k];
    let s_foot = (o - s).dot(&dir);
    Ok(TriangleLandmarks {
        longest_side_id: k,
        side_lengths: lens,
        midpoint: (s + e) * 0.5,
        altitude_foot: s + dir * s_foot,
        opposite_vertex: o,
        s_midpoint: 0.5 * lens[k],
        s_foot,
    })
}

/// Which graph of a thin domain a boundary point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphSide {
    /// `y = eps f1(x)`, interior above.
    Lower,
    /// `y = eps f2(x)`, interior below.
    Upper,
}

impl GraphSide {
    pub fn orientation(self) -> f64 {
        match self {
            Self::Lower => 1.0,
            Self::Upper => -1.0,
        }
    }

    pub fn side_id(self) -> usize {
        match self {
            Self::Lower => 0,
            Self::Upper => 1,
        }
    }
}

/// Signed curvature of `y = eps f(x)`, positive when the curve bends toward
/// the domain interior.
pub fn curvature_graph(f: &PolyBoundaryFn, x: f64, eps: f64, side: GraphSide) -> f64 {
    let d1 = eps * f.derivative(1, x);
    let d2 = eps * f.derivative(2, x);
    side.orientation() * d2 / (1.0 + d1 * d1).powf(1.5)
}
