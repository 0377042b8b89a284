use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::TorsionSolution;
use crate::numeric::least_squares;

/// Default radius of the fit region around the origin.
pub const DEFAULT_R_FIT: f64 = 0.15;
const MIN_FIT_NODES: usize = 30;

/// Fit of `u ≈ xy (c0 + c1 y + c2 x + c3 y² + c4 xy + c5 x²)` near the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedFit {
    pub r_fit: f64,
    /// `c0 = u_xy(0, 0)`.
    pub c0: f64,
    /// Coefficient of `xy²`.
    pub c1: f64,
    pub coefficients: [f64; 6],
    pub n_nodes: usize,
    pub rms: f64,
}

/// Mixed second derivative at the origin of a solution vanishing on both
/// coordinate axes near it, by least squares over nodes with `r < r_fit`.
pub fn mixed_derivative_origin(solution: &TorsionSolution, r_fit: f64) -> Result<MixedFit> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (p, u) in solution.mesh.nodes.iter().zip(&solution.nodal_values) {
        if p.norm() < r_fit {
            let (x, y) = (p.x, p.y);
            let xy = x * y;
            rows.push(vec![xy, xy * y, xy * x, xy * y * y, xy * x * y, xy * x * x]);
            rhs.push(*u);
        }
    }
    if rows.len() < MIN_FIT_NODES {
        return Err(Error::Fit(format!("{} nodes within r < {r_fit}, at least {MIN_FIT_NODES} needed", rows.len())));
    }
    let (c, rms) = least_squares(&rows, &rhs)?;
    let coefficients: [f64; 6] = c.try_into().map_err(|_| Error::Fit("unexpected coefficient count".into()))?;
    Ok(MixedFit { r_fit, c0: coefficients[0], c1: coefficients[1], coefficients, n_nodes: rows.len(), rms })
}
