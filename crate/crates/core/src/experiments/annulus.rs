use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{num, solve_domain, Claims, Report, SolveInfo, Table, DEFAULT_REL_TOL};
use crate::analysis::{boundary_profile, fail_point, BoundaryProfile, CriticalPoint};
use crate::error::{Error, Result};
use crate::exact::eval_concentric_annulus_torsion;
use crate::geometry::{DomainSpec, Point};

/// Inner and outer side ids of the annulus mesh.
const OUTER: usize = 0;
const INNER: usize = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusConfig {
    pub rho1: f64,
    pub rho2: f64,
    pub offset: f64,
    pub n_angles: usize,
    pub h: f64,
    pub rel_tol: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        Self { rho1: 1.0, rho2: 0.3, offset: 0.2, n_angles: 129, h: 0.02, rel_tol: DEFAULT_REL_TOL }
    }
}

/// `|∇u|` at `q_φ = (offset - rho2 cos 2φ, -rho2 sin 2φ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSample {
    pub phi: f64,
    pub point: Point,
    pub grad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentricControl {
    pub mean: f64,
    pub std: f64,
    /// `(max - min) / mean` over the inner boundary nodes.
    pub relative_spread: f64,
    pub exact: f64,
    pub relative_error: f64,
    pub solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusReport {
    pub config: AnnulusConfig,
    pub inner_profile: Vec<AnnulusSample>,
    pub argmax_phi: f64,
    pub inner_max: f64,
    pub outer_max: f64,
    /// Largest local maximum on the inner ring, refined.
    pub inner_fail_point: CriticalPoint,
    pub global_fail_point: CriticalPoint,
    /// Arc length along the inner ring from the nearest point `q0` to the
    /// global fail point; `None` when it lies on the outer ring.
    pub global_distance_to_q0: Option<f64>,
    pub noise_floor: f64,
    pub monotonicity_violations: usize,
    pub concentric: ConcentricControl,
    pub solve: SolveInfo,
    pub tolerances: AnnulusTolerances,
    pub claims: Claims,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusTolerances {
    pub location_arc_length: f64,
    pub concentric_relative: f64,
    pub noise_factor: f64,
}

const TOLERANCES: AnnulusTolerances =
    AnnulusTolerances { location_arc_length: 1e-2, concentric_relative: 1e-3, noise_factor: 3.0 };

/// Arc length on the inner ring (measured from angle 0 about its centre).
fn inner_s(rho2: f64, q: Point, centre: Point) -> f64 {
    let d = q - centre;
    rho2 * d.y.atan2(d.x).rem_euclid(2.0 * PI)
}

fn inner_grad(profile: &BoundaryProfile, s: f64) -> f64 {
    profile.dudn_at(INNER, s).abs()
}

/// Gradient on the inner ring of an eccentric annulus, with the concentric
/// annulus of the same radii and mesh size as a noise reference.
pub fn annulus_experiment(config: &AnnulusConfig) -> Result<AnnulusReport> {
    if config.n_angles < 64 {
        return Err(Error::InvalidArgument(format!("n_angles must be at least 64, got {}", config.n_angles)));
    }
    let (rho1, rho2, eps) = (config.rho1, config.rho2, config.offset);
    let specs = [DomainSpec::Annulus { rho1, rho2, offset: eps }, DomainSpec::Annulus { rho1, rho2, offset: 0.0 }];
    let solved: Vec<_> = specs
        .par_iter()
        .map(|spec| {
            let sol = solve_domain(spec, config.h, config.rel_tol)?;
            let profile = boundary_profile(&sol)?;
            Ok((sol, profile))
        })
        .collect::<Result<_>>()?;
    let (sol, profile) = &solved[0];
    let (csol, cprofile) = &solved[1];

    let inner: Vec<f64> = cprofile.side(INNER).samples.iter().map(|p| p.dudn.abs()).collect();
    let n = inner.len() as f64;
    let mean = inner.iter().sum::<f64>() / n;
    let std = (inner.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n).sqrt();
    let (lo, hi) = inner.iter().fold((f64::INFINITY, 0.0f64), |(a, b), g| (a.min(*g), b.max(*g)));
    let exact = eval_concentric_annulus_torsion(rho1, rho2, rho2)?.1.abs();
    let concentric = ConcentricControl {
        mean,
        std,
        relative_spread: (hi - lo) / mean,
        exact,
        relative_error: (mean - exact).abs() / exact,
        solve: SolveInfo::of(csol, config.rel_tol),
    };

    let centre = Point::new(eps, 0.0);
    let m = config.n_angles;
    let inner_profile: Vec<AnnulusSample> = (0..m)
        .map(|k| {
            let phi = PI * k as f64 / (m - 1) as f64;
            let point = Point::new(eps - rho2 * (2.0 * phi).cos(), -rho2 * (2.0 * phi).sin());
            AnnulusSample { phi, point, grad: inner_grad(profile, inner_s(rho2, point, centre)) }
        })
        .collect();
    let best = inner_profile.iter().max_by(|a, b| a.grad.total_cmp(&b.grad)).expect("non-empty profile");
    let outer_max = profile.side(OUTER).samples.iter().map(|p| p.dudn.abs()).fold(0.0, f64::max);
    let inner_max = profile.side(INNER).samples.iter().map(|p| p.dudn.abs()).fold(0.0, f64::max);

    // Moving away from q0 the gradient must fall: on the first half of the
    // φ range and, by the mirror symmetry, rise again on the second.
    let noise_floor = TOLERANCES.noise_factor * std;
    let monotonicity_violations = inner_profile
        .windows(2)
        .filter(|w| {
            let rising = w[1].grad - w[0].grad;
            if w[1].phi <= 0.5 * PI {
                rising > noise_floor
            } else {
                -rising > noise_floor
            }
        })
        .count();

    let report = fail_point(profile, None)?;
    let q0 = Point::new(eps - rho2, 0.0);
    let s_q0 = inner_s(rho2, q0, centre);
    let global = report.global.clone();
    let global_distance_to_q0 = (global.side_id == INNER).then(|| {
        let d = (global.s - s_q0).abs();
        d.min(2.0 * PI * rho2 - d)
    });

    let tol = TOLERANCES;
    let mut claims = Claims::new();
    claims
        .insert("global_fail_point_at_q0".into(), global_distance_to_q0.is_some_and(|d| d <= tol.location_arc_length));
    claims.insert("inner_max_exceeds_outer_max".into(), inner_max > outer_max);
    claims.insert("no_monotonicity_violations".into(), monotonicity_violations == 0);
    claims.insert("concentric_flux_constant".into(), concentric.relative_spread <= tol.concentric_relative);
    claims.insert("concentric_flux_matches_exact".into(), concentric.relative_error <= tol.concentric_relative);

    Ok(AnnulusReport {
        config: config.clone(),
        argmax_phi: best.phi,
        inner_profile,
        inner_max,
        outer_max,
        inner_fail_point: report.per_side[INNER].clone(),
        global_fail_point: global,
        global_distance_to_q0,
        noise_floor,
        monotonicity_violations,
        concentric,
        solve: SolveInfo::of(sol, config.rel_tol),
        tolerances: tol,
        claims,
    })
}

impl Report for AnnulusReport {
    const NAME: &'static str = "annulus";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new("phi,x,y,grad");
        for s in &self.inner_profile {
            t.row(&[num(s.phi), num(s.point.x), num(s.point.y), num(s.grad)]);
        }
        t.finish()
    }
}
