use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{num, solve_domain, Claims, Report, SolveInfo, Table, DEFAULT_REL_TOL};
use crate::analysis::{
    boundary_profile, locate_critical_points, mixed_derivative_origin, CriticalKind, MixedFit, DEFAULT_R_FIT,
};
use crate::error::{Error, Result};
use crate::exact::{barrier_g, Family};
use crate::fem::{solve_poisson, Rhs, SolveOptions};
use crate::geometry::{build_mesh, DomainSpec, Point};
use crate::numeric::linear_fit;

/// Half base of the equilateral triangle `(±√3/3, 0), (0, 1)`.
fn half_base() -> f64 {
    3f64.sqrt() / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: Family,
    pub t_list: Vec<f64>,
    pub h: f64,
    pub rel_tol: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self { family: Family::Stretch, t_list: vec![0.04, 0.08], h: 0.008, rel_tol: DEFAULT_REL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub t: f64,
    /// Abscissa of the maximum of `|∇u|²` on the base.
    pub x_fail: f64,
    pub ratio: f64,
    pub base_maxima: usize,
    pub x_foot: f64,
    pub x_midpoint: f64,
    pub uy_at_m: f64,
    pub uy_at_f: f64,
    /// `u_y(M) - u_y(F)`.
    pub difference: f64,
    pub difference_over_t2: f64,
    pub solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub config: FamilyConfig,
    pub rows: Vec<PerturbationRow>,
    /// Bounds on `x(t) / t`.
    pub ratio_bounds: (f64, f64),
    /// `difference / t²` must exceed this.
    pub difference_bound: f64,
    /// Intercept of a linear fit of `x(t) / t` in `t`.
    pub phi1_0: f64,
    /// `(v1)_xy(O)` inferred from `phi1_0`.
    pub v1_xy_from_ratio: f64,
    /// `(v1)_xy(O)` inferred from the gradient difference at the smallest `t`.
    pub v1_xy_from_difference: f64,
    pub linearity_tolerance: f64,
    pub claims: Claims,
}

fn family_bounds(family: Family) -> ((f64, f64), f64) {
    match family {
        Family::Stretch => ((7.0 / 24.0, 0.5), 1.0 / 32.0),
        Family::Tilt => ((0.0, 5.0 / 12.0), 1.0 / 8.0),
    }
}

/// Fail-point abscissa on the base and the landmark gradient difference for
/// a one-parameter perturbation of the equilateral triangle.
pub fn triangle_family(config: &FamilyConfig) -> Result<PerturbationReport> {
    if config.t_list.len() < 2 {
        return Err(Error::InvalidArgument("need at least two t values".into()));
    }
    if config.t_list.iter().any(|t| !(*t > 0.0 && *t <= 0.15)) {
        return Err(Error::InvalidArgument("t values must lie in (0, 0.15]".into()));
    }
    let mut t_list = config.t_list.clone();
    t_list.sort_by(f64::total_cmp);
    let family = config.family;
    let rows: Vec<PerturbationRow> = t_list
        .par_iter()
        .map(|&t| {
            let [a, b, c] = family.vertices(t);
            let sol = solve_domain(&DomainSpec::Triangle { a, b, c }, config.h, config.rel_tol)?;
            let profile = boundary_profile(&sol)?;
            let maxima: Vec<_> =
                locate_critical_points(&profile, 0)?.into_iter().filter(|c| c.kind == CriticalKind::Max).collect();
            let best = maxima
                .iter()
                .max_by(|p, q| p.grad_sq.total_cmp(&q.grad_sq))
                .ok_or_else(|| Error::NotFound(format!("no maximum of |∇u| on the base for t = {t}")))?;
            let (x_foot, x_midpoint) = family.base_landmarks(t);
            // The base runs from (-√3/3, 0); its inward normal is +y.
            let uy = |x: f64| profile.dudn_at(0, x + half_base());
            let (uy_at_m, uy_at_f) = (uy(x_midpoint), uy(x_foot));
            Ok(PerturbationRow {
                t,
                x_fail: best.point.x,
                ratio: best.point.x / t,
                base_maxima: maxima.len(),
                x_foot,
                x_midpoint,
                uy_at_m,
                uy_at_f,
                difference: uy_at_m - uy_at_f,
                difference_over_t2: (uy_at_m - uy_at_f) / (t * t),
                solve: SolveInfo::of(&sol, config.rel_tol),
            })
        })
        .collect::<Result<_>>()?;

    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let (_, phi1_0) = linear_fit(&ts, &ratios);
    let first = &rows[0];
    let (v1_xy_from_ratio, v1_xy_from_difference) = match family {
        Family::Stretch => (1.5 * (phi1_0 - 0.5), 2.0 * first.difference_over_t2 - 0.375),
        Family::Tilt => (1.5 * phi1_0, 0.75 - first.difference_over_t2),
    };
    let (ratio_bounds, difference_bound) = family_bounds(family);
    let linearity_tolerance = 0.05;
    let mut claims = Claims::new();
    claims.insert(
        "ratio_within_bounds".into(),
        rows.iter().all(|r| r.ratio > ratio_bounds.0 && r.ratio < ratio_bounds.1),
    );
    claims.insert("difference_exceeds_bound".into(), rows.iter().all(|r| r.difference_over_t2 > difference_bound));
    claims.insert("unique_base_maximum".into(), rows.iter().all(|r| r.base_maxima == 1));
    claims.insert("linear_regime".into(), (rows[1].ratio - rows[0].ratio).abs() <= linearity_tolerance);
    Ok(PerturbationReport {
        config: config.clone(),
        rows,
        ratio_bounds,
        difference_bound,
        phi1_0,
        v1_xy_from_ratio,
        v1_xy_from_difference,
        linearity_tolerance,
        claims,
    })
}

impl Report for PerturbationReport {
    const NAME: &'static str = "triangle_family";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new("t,x_fail,ratio,uy_at_m,uy_at_f,difference,difference_over_t2");
        for r in &self.rows {
            t.row(&[
                num(r.t),
                num(r.x_fail),
                num(r.ratio),
                num(r.uy_at_m),
                num(r.uy_at_f),
                num(r.difference),
                num(r.difference_over_t2),
            ]);
        }
        t.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2Config {
    pub h: f64,
    pub r_fits: Vec<f64>,
    pub rel_tol: f64,
}

impl Default for W2Config {
    fn default() -> Self {
        Self { h: 0.005, r_fits: vec![0.1, DEFAULT_R_FIT, 0.2], rel_tol: DEFAULT_REL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2Report {
    pub config: W2Config,
    /// Fits at each radius of `r_fits`.
    pub fits: Vec<MixedFit>,
    /// `c0` at the default radius.
    pub c0_fit: f64,
    pub c1_fit: f64,
    /// Largest `|c0(r) - c0_fit|` over the radii.
    pub c0_spread: f64,
    pub in_bounds: bool,
    /// `min (g - w2)` over the mesh nodes.
    pub min_barrier_gap: f64,
    pub barrier_dominates: bool,
    pub v1_xy_stretch: f64,
    pub solve: SolveInfo,
    pub tolerances: W2Tolerances,
    pub claims: Claims,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2Tolerances {
    pub barrier: f64,
    pub c0_spread: f64,
    pub c1: f64,
}

const W2_TOLERANCES: W2Tolerances = W2Tolerances { barrier: 1e-8, c0_spread: 0.02, c1: 0.05 };

/// `-Δw2 = 3x/2` on the half triangle `(0,0), (√3/3,0), (0,1)` with zero
/// boundary data: mixed derivative at the origin and the polynomial barrier.
pub fn w2_bound_experiment(config: &W2Config) -> Result<W2Report> {
    if config.r_fits.is_empty() {
        return Err(Error::InvalidArgument("r_fits must not be empty".into()));
    }
    let spec =
        DomainSpec::Triangle { a: Point::new(0.0, 0.0), b: Point::new(half_base(), 0.0), c: Point::new(0.0, 1.0) };
    let mesh = Arc::new(build_mesh(&spec, config.h)?);
    let rhs = Rhs::new("3x/2", |p| 1.5 * p.x);
    let sol = solve_poisson(mesh, &rhs, |_| 0.0, SolveOptions::with_tol(config.rel_tol))?;
    let fits: Vec<MixedFit> = config.r_fits.iter().map(|&r| mixed_derivative_origin(&sol, r)).collect::<Result<_>>()?;
    let main = mixed_derivative_origin(&sol, DEFAULT_R_FIT)?;
    let c0_spread = fits.iter().map(|f| (f.c0 - main.c0).abs()).fold(0.0, f64::max);
    let min_barrier_gap = sol
        .mesh
        .nodes
        .iter()
        .zip(&sol.nodal_values)
        .map(|(p, w)| barrier_g(p.x, p.y).value - w)
        .fold(f64::INFINITY, f64::min);
    let tol = W2_TOLERANCES;
    let bound = 5.0 / 16.0;
    let in_bounds = main.c0 > 0.0 && main.c0 < bound;
    let barrier_dominates = min_barrier_gap >= -tol.barrier;
    let v1_xy_stretch = -main.c0;
    let mut claims = Claims::new();
    claims.insert("c0_within_bounds".into(), in_bounds);
    claims.insert("barrier_dominates".into(), barrier_dominates);
    claims.insert("v1_xy_within_bounds".into(), v1_xy_stretch > -bound && v1_xy_stretch < 0.0);
    claims.insert("c0_stable_across_radii".into(), c0_spread <= tol.c0_spread);
    claims.insert("c1_near_minus_three_quarters".into(), (main.c1 + 0.75).abs() <= tol.c1);
    Ok(W2Report {
        config: config.clone(),
        fits,
        c0_fit: main.c0,
        c1_fit: main.c1,
        c0_spread,
        in_bounds,
        min_barrier_gap,
        barrier_dominates,
        v1_xy_stretch,
        solve: SolveInfo::of(&sol, config.rel_tol),
        tolerances: tol,
        claims,
    })
}

impl Report for W2Report {
    const NAME: &'static str = "w2_bound";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new("r_fit,c0,c1,n_nodes,rms");
        for f in &self.fits {
            t.row(&[num(f.r_fit), num(f.c0), num(f.c1), f.n_nodes.to_string(), num(f.rms)]);
        }
        t.finish()
    }
}
