use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{num, Claims, Report, Table};
use crate::exact::{
    barrier_g, concentric_annulus_torsion, ellipse_torsion, equilateral_torsion, eval_concentric_annulus_torsion,
    eval_rectangle_torsion, gap_alternative_coefficient, gap_leading_term, narrow_coefficients, Jet2,
};
use crate::geometry::PolyBoundaryFn;

/// One oracle identity: `|value - target| <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleCheck {
    fn new(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub checks: Vec<OracleCheck>,
    /// Wall-clock time; left out of the JSON so reports stay reproducible.
    #[serde(skip)]
    pub runtime_seconds: f64,
    pub runtime_limit_seconds: f64,
    pub claims: Claims,
}

const SYMBOLIC_TOL: f64 = 1e-12;
const FD_TOL: f64 = 1e-4;
const RUNTIME_LIMIT: f64 = 1.0;

/// Grid of `n × n` points over `[x0, x1] × [y0, y1]` kept where `inside`.
fn grid(n: usize, (x0, x1): (f64, f64), (y0, y1): (f64, f64), inside: impl Fn(f64, f64) -> bool) -> Vec<(f64, f64)> {
    let step = |a: f64, b: f64, k: usize| a + (b - a) * (k as f64 + 0.5) / n as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (step(x0, x1, i), step(y0, y1, j)))
        .filter(|&(x, y)| inside(x, y))
        .collect()
}

/// Largest `|Δu + 1|` over the points, with `Δu` from second-order jets.
fn max_jet_residual(points: &[(f64, f64)], u: impl Fn(Jet2, Jet2) -> Jet2) -> f64 {
    points
        .iter()
        .map(|&(x, y)| {
            let (jx, jy) = Jet2::variables(x, y);
            (u(jx, jy).laplacian() + 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Self-consistency of the closed forms and asymptotic coefficients; no
/// finite elements involved.
pub fn validate_oracles() -> ValidateReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    let n = 41;

    let (a, b) = (1.0, 0.5);
    let pts = grid(n, (-a, a), (-b, b), |x, y| (x / a).powi(2) + (y / b).powi(2) < 1.0);
    checks.push(OracleCheck::new(
        "ellipse_laplacian",
        max_jet_residual(&pts, |x, y| ellipse_torsion(a, b, x, y)),
        0.0,
        SYMBOLIC_TOL,
    ));
    let pts = grid(n, (-1.0, 1.0), (-1.0, 1.0), |x, y| x * x + y * y < 1.0);
    checks.push(OracleCheck::new(
        "disk_laplacian",
        max_jet_residual(&pts, |x, y| ellipse_torsion(1.0, 1.0, x, y)),
        0.0,
        SYMBOLIC_TOL,
    ));
    let (rho1, rho2) = (1.0, 0.3);
    let pts = grid(n, (-rho1, rho1), (-rho1, rho1), |x, y| {
        let r = x.hypot(y);
        r > rho2 && r < rho1
    });
    checks.push(OracleCheck::new(
        "annulus_laplacian",
        max_jet_residual(&pts, |x, y| concentric_annulus_torsion(rho1, rho2, x, y)),
        0.0,
        SYMBOLIC_TOL,
    ));
    let r3 = 3f64.sqrt();
    let pts = grid(n, (-r3 / 3.0, r3 / 3.0), (0.0, 1.0), |x, y| y < 1.0 - r3 * x.abs());
    checks.push(OracleCheck::new(
        "equilateral_laplacian",
        max_jet_residual(&pts, equilateral_torsion),
        0.0,
        SYMBOLIC_TOL,
    ));

    // Boundary values.
    let angles: Vec<f64> = (0..64).map(|k| std::f64::consts::TAU * k as f64 / 64.0).collect();
    let ellipse_edge = angles.iter().map(|t| ellipse_torsion(a, b, a * t.cos(), b * t.sin()).abs()).fold(0.0, f64::max);
    checks.push(OracleCheck::new("ellipse_boundary_zero", ellipse_edge, 0.0, SYMBOLIC_TOL));
    let ring_edge = [rho1, rho2]
        .iter()
        .map(|&r| eval_concentric_annulus_torsion(rho1, rho2, r).map(|v| v.0.abs()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    checks.push(OracleCheck::new("annulus_boundary_zero", ring_edge, 0.0, SYMBOLIC_TOL));
    let tri_edge = (0..=32)
        .map(|k| {
            let s = k as f64 / 32.0;
            let x = -r3 / 3.0 + s * 2.0 * r3 / 3.0;
            let on_base = equilateral_torsion(x, 0.0);
            let on_right = equilateral_torsion(s * r3 / 3.0, 1.0 - s);
            let on_left = equilateral_torsion(-s * r3 / 3.0, 1.0 - s);
            on_base.abs().max(on_right.abs()).max(on_left.abs())
        })
        .fold(0.0, f64::max);
    checks.push(OracleCheck::new("equilateral_boundary_zero", tri_edge, 0.0, SYMBOLIC_TOL));

    // Radial derivative against the jet gradient.
    let r = 0.55;
    let (jx, jy) = Jet2::variables(r, 0.0);
    let jet = concentric_annulus_torsion(rho1, rho2, jx, jy);
    let radial = eval_concentric_annulus_torsion(rho1, rho2, r).map(|v| v.1).unwrap_or(f64::NAN);
    checks.push(OracleCheck::new("annulus_radial_derivative", radial, jet.dx, SYMBOLIC_TOL));

    // Rectangle series by centred differences.
    let (eps, terms, d) = (0.2, 200, 1e-3);
    let pts = grid(9, (0.1, 0.9), (-0.8 * eps, 0.8 * eps), |_, _| true);
    let fd = pts
        .iter()
        .map(|&(x, y)| {
            let u = |x: f64, y: f64| eval_rectangle_torsion(eps, x, y, terms);
            let lap = (u(x + d, y) + u(x - d, y) + u(x, y + d) + u(x, y - d) - 4.0 * u(x, y)) / (d * d);
            (lap + 1.0).abs()
        })
        .fold(0.0, f64::max);
    checks.push(OracleCheck::new("rectangle_series_laplacian_fd", fd, 0.0, FD_TOL));
    let rect_edge = (0..=16)
        .map(|k| {
            let x = k as f64 / 16.0;
            eval_rectangle_torsion(eps, x, eps, terms).abs()
        })
        .fold(0.0, f64::max);
    checks.push(OracleCheck::new("rectangle_boundary_zero", rect_edge, 0.0, 1e-6));

    let g = barrier_g(0.2, 0.3);
    let residual = grid(21, (0.0, r3 / 3.0), (0.0, 1.0), |x, y| y < 1.0 - r3 * x)
        .iter()
        .map(|&(x, y)| barrier_g(x, y).laplacian_residual.abs())
        .fold(0.0, f64::max);
    checks.push(OracleCheck::new("barrier_laplacian_residual", residual, 0.0, SYMBOLIC_TOL));
    checks.push(OracleCheck::new("barrier_mixed_derivative_origin", g.g_xy_origin, 5.0 / 16.0, SYMBOLIC_TOL));

    let poly = |c: &[f64]| PolyBoundaryFn::new(c.to_vec()).expect("valid coefficients");
    let (lower, upper) = (poly(&[-1.0, 0.0, 1.0]), poly(&[1.0, 0.0, -1.0]));
    let c = narrow_coefficients(&lower, &upper, 0.0);
    checks.push(OracleCheck::new("narrow_symmetric_lambda1", c.lambda1, 1.0, SYMBOLIC_TOL));
    checks.push(OracleCheck::new("narrow_symmetric_lambda2_lower", c.lambda2_lower, -4.0, SYMBOLIC_TOL));
    checks.push(OracleCheck::new("narrow_symmetric_lambda2_upper", c.lambda2_upper, -4.0, SYMBOLIC_TOL));
    let (f1, f2) = (poly(&[-0.5, 0.0, 0.5]), poly(&[1.0, 0.0, -1.0]));
    match gap_leading_term(&f1, &f2, -1.0, 1.0) {
        Ok(gap) => {
            checks.push(OracleCheck::new("gap_thickest_section", gap.z0, 0.0, 1e-9));
            checks.push(OracleCheck::new("gap_coefficient", gap.coefficient, -0.28125, SYMBOLIC_TOL));
            checks.push(OracleCheck::new(
                "gap_alternative_coefficient",
                gap_alternative_coefficient(&f1, &f2, gap.z0),
                -0.140625,
                SYMBOLIC_TOL,
            ));
        }
        Err(_) => checks.push(OracleCheck::new("gap_thickest_section", f64::NAN, 0.0, 1e-9)),
    }

    let runtime_seconds = start.elapsed().as_secs_f64();
    let mut claims = Claims::new();
    for c in &checks {
        claims.insert(c.name.clone(), c.pass);
    }
    claims.insert("runtime_below_limit".into(), runtime_seconds < RUNTIME_LIMIT);
    ValidateReport { checks, runtime_seconds, runtime_limit_seconds: RUNTIME_LIMIT, claims }
}

impl Report for ValidateReport {
    const NAME: &'static str = "validate";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new("name,value,target,tolerance,pass");
        for c in &self.checks {
            t.row(&[c.name.clone(), num(c.value), num(c.target), num(c.tolerance), c.pass.to_string()]);
        }
        t.finish()
    }
}
