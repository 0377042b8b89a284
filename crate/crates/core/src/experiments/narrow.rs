use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{log_log_slope, num, solve_domain, Claims, Report, SolveInfo, Table, DEFAULT_REL_TOL};
use crate::analysis::{boundary_profile, fail_point, BoundaryProfile};
use crate::error::{Error, Result};
use crate::exact::{eval_ellipse_torsion, gap_alternative_coefficient, gap_leading_term, narrow_coefficients};
use crate::fem::{solve_torsion, SolveOptions, TorsionSolution};
use crate::geometry::{narrow_mesh, DomainSpec, GraphSide, NarrowSpec, Point, PolyBoundaryFn};

/// Mesh rule for thin domains: `ny` fibres with spacing `eps / h_div` across
/// the widest section and `nx_per_unit` columns per unit length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowResolution {
    pub h_div: f64,
    pub nx_per_unit: f64,
}

impl Default for NarrowResolution {
    fn default() -> Self {
        Self { h_div: 10.0, nx_per_unit: 400.0 }
    }
}

impl NarrowResolution {
    /// `(nx, ny)` for `spec`, multiplied by `refine`.
    pub fn counts(&self, spec: &NarrowSpec, refine: usize) -> (usize, usize) {
        let even = |n: usize| n + n % 2;
        let ny = ((spec.max_gap() / (spec.eps / self.h_div)).ceil() as usize).max(8);
        let nx = ((spec.b - spec.a) * self.nx_per_unit).ceil() as usize;
        (even(nx.max(2)) * refine, even(ny) * refine)
    }
}

/// The pair `f1 = -(1 - x²)`, `f2 = 1 - x²` on `[-1, 1]`.
pub fn symmetric_parabolas(eps: f64) -> NarrowSpec {
    let f2 = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).expect("valid polynomial");
    NarrowSpec::new(-1.0, 1.0, f2.scaled(-1.0), f2, eps).expect("valid thin domain")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowSweepConfig {
    /// Thin domain; its `eps` is replaced by each entry of `eps_list`.
    pub spec: NarrowSpec,
    pub eps_list: Vec<f64>,
    pub resolution: NarrowResolution,
    pub rel_tol: f64,
    /// Re-solve the smallest `eps` on a twice finer mesh.
    pub refinement_check: bool,
}

impl Default for NarrowSweepConfig {
    fn default() -> Self {
        Self {
            spec: symmetric_parabolas(0.1),
            eps_list: vec![0.2, 0.1, 0.05],
            resolution: NarrowResolution::default(),
            rel_tol: 1e-13,
            refinement_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowRow {
    pub eps: f64,
    pub side: GraphSide,
    pub z0: f64,
    pub fem_gradsq_at_z0: f64,
    pub predicted_order2: f64,
    pub predicted_order4: f64,
    pub remainder: f64,
    pub remainder_over_eps6: f64,
    /// `(fem - eps² lambda1) / eps⁴`.
    pub lambda2_fem: f64,
    pub lambda2_exact: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowFailX {
    pub eps: f64,
    pub side_id: usize,
    pub x: f64,
    pub distance_to_z0: f64,
    /// Column spacing of the mesh; distances below it are not resolved.
    pub x_resolution: f64,
    pub solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub eps: f64,
    pub coarse: [f64; 2],
    pub fine: [f64; 2],
    pub max_change: f64,
    /// `eps⁴ max |lambda2|`.
    pub eps4_term: f64,
    pub fraction: f64,
    pub fine_solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowSweepReport {
    pub config: NarrowSweepConfig,
    pub z0: f64,
    pub rows: Vec<NarrowRow>,
    /// Log-log slope of `|remainder|` against `eps`, lower then upper side.
    pub remainder_slope: [f64; 2],
    pub fail_x: Vec<NarrowFailX>,
    pub refinement: Option<RefinementCheck>,
    pub tolerances: NarrowSweepTolerances,
    pub claims: Claims,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowSweepTolerances {
    pub min_remainder_slope: f64,
    pub lambda2_relative: f64,
    pub refinement_fraction: f64,
}

const SWEEP_TOLERANCES: NarrowSweepTolerances =
    NarrowSweepTolerances { min_remainder_slope: 5.5, lambda2_relative: 0.05, refinement_fraction: 0.1 };

fn solve_narrow(spec: &NarrowSpec, res: &NarrowResolution, refine: usize, rel_tol: f64) -> Result<TorsionSolution> {
    let (nx, ny) = res.counts(spec, refine);
    let mesh = Arc::new(narrow_mesh(spec, nx, ny)?);
    solve_torsion(mesh, SolveOptions::with_tol(rel_tol))
}

/// `|∇u|²` on both graphs at abscissa `x`, lower first.
fn gradsq_at_x(profile: &BoundaryProfile, spec: &NarrowSpec, x: f64) -> [f64; 2] {
    let (lo, hi) = spec.bounds(x);
    let mesh = &profile.flux.mesh;
    [(GraphSide::Lower, lo), (GraphSide::Upper, hi)].map(|(side, y)| {
        let (s, _) = mesh.project_to_side(side.side_id(), &Point::new(x, y));
        profile.grad_sq_at(side.side_id(), s)
    })
}

fn check_eps_list(eps_list: &[f64], min_len: usize) -> Result<()> {
    if eps_list.len() < min_len {
        return Err(Error::InvalidArgument(format!("need at least {min_len} eps values, got {}", eps_list.len())));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("eps values must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Squared boundary gradients at the thickest section against the two-term
/// expansion, for a decreasing list of thicknesses.
pub fn narrow_sweep(config: &NarrowSweepConfig) -> Result<NarrowSweepReport> {
    check_eps_list(&config.eps_list, 3)?;
    let base = &config.spec;
    let z0 = gap_leading_term(&base.f1, &base.f2, base.a, base.b)?.z0;
    let coeffs = narrow_coefficients(&base.f1, &base.f2, z0);

    let cells: Vec<(f64, usize)> = config
        .eps_list
        .iter()
        .map(|&e| (e, 1))
        .chain(config.refinement_check.then(|| (*config.eps_list.last().unwrap(), 2)))
        .collect();
    let solved: Vec<(NarrowSpec, TorsionSolution, BoundaryProfile)> = cells
        .par_iter()
        .map(|&(eps, refine)| {
            let spec = base.with_eps(eps);
            spec.validate()?;
            let sol = solve_narrow(&spec, &config.resolution, refine, config.rel_tol)?;
            let profile = boundary_profile(&sol)?;
            Ok((spec, sol, profile))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut fail_x = Vec::new();
    for (spec, sol, profile) in solved.iter().take(config.eps_list.len()) {
        let eps = spec.eps;
        let fem = gradsq_at_x(profile, spec, z0);
        for (k, side) in [GraphSide::Lower, GraphSide::Upper].into_iter().enumerate() {
            let order2 = eps * eps * coeffs.lambda1;
            let order4 = order2 + eps.powi(4) * coeffs.lambda2(side);
            rows.push(NarrowRow {
                eps,
                side,
                z0,
                fem_gradsq_at_z0: fem[k],
                predicted_order2: order2,
                predicted_order4: order4,
                remainder: fem[k] - order4,
                remainder_over_eps6: (fem[k] - order4) / eps.powi(6),
                lambda2_fem: (fem[k] - order2) / eps.powi(4),
                lambda2_exact: coeffs.lambda2(side),
            });
        }
        let report = fail_point(profile, None)?;
        let (nx, _) = config.resolution.counts(spec, 1);
        fail_x.push(NarrowFailX {
            eps,
            side_id: report.global.side_id,
            x: report.global.point.x,
            distance_to_z0: (report.global.point.x - z0).abs(),
            x_resolution: (spec.b - spec.a) / nx as f64,
            solve: SolveInfo::of(sol, config.rel_tol),
        });
    }

    let side_rows = |side: GraphSide| -> (Vec<f64>, Vec<f64>) {
        rows.iter().filter(|r| r.side == side).map(|r| (r.eps, r.remainder)).unzip()
    };
    let remainder_slope = [GraphSide::Lower, GraphSide::Upper].map(|side| {
        let (e, r) = side_rows(side);
        log_log_slope(&e, &r)
    });

    let eps4_term = |eps: f64| eps.powi(4) * coeffs.lambda2_lower.abs().max(coeffs.lambda2_upper.abs());
    let refinement = if config.refinement_check {
        let n = config.eps_list.len();
        let (spec, _, coarse_profile) = &solved[n - 1];
        let (_, fine_sol, fine_profile) = &solved[n];
        let coarse = gradsq_at_x(coarse_profile, spec, z0);
        let fine = gradsq_at_x(fine_profile, spec, z0);
        let max_change = (coarse[0] - fine[0]).abs().max((coarse[1] - fine[1]).abs());
        let term = eps4_term(spec.eps);
        Some(RefinementCheck {
            eps: spec.eps,
            coarse,
            fine,
            max_change,
            eps4_term: term,
            fraction: max_change / term,
            fine_solve: SolveInfo::of(fine_sol, config.rel_tol),
        })
    } else {
        None
    };

    let tol = SWEEP_TOLERANCES;
    let mut claims = Claims::new();
    claims.insert("remainder_slope_at_least_5_5".into(), remainder_slope.iter().all(|s| *s >= tol.min_remainder_slope));
    let smallest = *config.eps_list.last().unwrap();
    claims.insert(
        "lambda2_matches_within_5_percent".into(),
        rows.iter().filter(|r| r.eps == smallest).all(|r| {
            if r.lambda2_exact == 0.0 {
                r.lambda2_fem.abs() <= tol.lambda2_relative
            } else {
                (r.lambda2_fem / r.lambda2_exact - 1.0).abs() <= tol.lambda2_relative
            }
        }),
    );
    claims.insert(
        "fail_x_approaches_z0".into(),
        fail_x
            .windows(2)
            .all(|w| w[1].distance_to_z0 < w[0].distance_to_z0 || w[1].distance_to_z0 <= w[1].x_resolution),
    );
    if let Some(r) = &refinement {
        claims.insert("refinement_change_below_10_percent_of_eps4_term".into(), r.fraction < tol.refinement_fraction);
    }

    Ok(NarrowSweepReport {
        config: config.clone(),
        z0,
        rows,
        remainder_slope,
        fail_x,
        refinement,
        tolerances: tol,
        claims,
    })
}

impl Report for NarrowSweepReport {
    const NAME: &'static str = "narrow_sweep";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new(
            "eps,side,z0,fem_gradsq_at_z0,predicted_order2,predicted_order4,remainder,remainder_over_eps6,lambda2_fem,lambda2_exact",
        );
        for r in &self.rows {
            let side = match r.side {
                GraphSide::Lower => "lower",
                GraphSide::Upper => "upper",
            };
            t.row(&[
                num(r.eps),
                side.into(),
                num(r.z0),
                num(r.fem_gradsq_at_z0),
                num(r.predicted_order2),
                num(r.predicted_order4),
                num(r.remainder),
                num(r.remainder_over_eps6),
                num(r.lambda2_fem),
                num(r.lambda2_exact),
            ]);
        }
        t.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowCompareConfig {
    pub spec: NarrowSpec,
    pub resolution: NarrowResolution,
    pub rel_tol: f64,
}

impl Default for NarrowCompareConfig {
    fn default() -> Self {
        let f2 = PolyBoundaryFn::new(vec![1.0, 0.0, -1.0]).expect("valid polynomial");
        Self {
            spec: NarrowSpec::new(-1.0, 1.0, f2.scaled(-0.5), f2, 0.05).expect("valid thin domain"),
            resolution: NarrowResolution::default(),
            rel_tol: 1e-13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Lower,
    Upper,
    Tie,
}

/// Candidate formulas for the leading gap coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapReading {
    /// `(f1'' + f2'') (f2 - f1)³ / 12`.
    CurvatureSum,
    /// `a1'' (f2 - f1)³ / 12` with `a1 = (f1 + f2) / 2`.
    MeanCurvature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowComparison {
    pub config: NarrowCompareConfig,
    pub z0: f64,
    pub lower_gradsq: f64,
    pub upper_gradsq: f64,
    /// Lower then upper, on the coarser mesh.
    pub coarse_gradsq: [f64; 2],
    /// `upper - lower` on the finer mesh.
    pub gap_fem: f64,
    pub gap_fem_coarse: f64,
    pub refinement_variation: f64,
    pub gap_predicted: f64,
    pub gap_alternative: f64,
    pub tie_expected: bool,
    pub winner_side: Winner,
    pub predicted_winner: Winner,
    pub reading_matched: Option<GapReading>,
    pub margin_over_variation: f64,
    pub coarse_solve: SolveInfo,
    pub fine_solve: SolveInfo,
    pub tie_tolerance: f64,
    pub claims: Claims,
}

/// Absolute gap below which a symmetric pair counts as tied.
const GAP_TIE: f64 = 1e-6;

/// Which graph carries the larger gradient at the thickest section, with
/// the sign of the leading gap term and a refinement-based error bar.
pub fn narrow_side_comparison(config: &NarrowCompareConfig) -> Result<NarrowComparison> {
    let spec = &config.spec;
    spec.validate()?;
    let lead = gap_leading_term(&spec.f1, &spec.f2, spec.a, spec.b)?;
    let z0 = lead.z0;
    let results: Vec<(TorsionSolution, [f64; 2])> = [1usize, 2]
        .par_iter()
        .map(|&refine| {
            let sol = solve_narrow(spec, &config.resolution, refine, config.rel_tol)?;
            let g = gradsq_at_x(&boundary_profile(&sol)?, spec, z0);
            Ok((sol, g))
        })
        .collect::<Result<_>>()?;
    let (coarse_sol, coarse) = &results[0];
    let (fine_sol, fine) = &results[1];
    let gap_fem = fine[1] - fine[0];
    let gap_fem_coarse = coarse[1] - coarse[0];
    let variation = (gap_fem - gap_fem_coarse).abs();
    let e4 = spec.eps.powi(4);
    let gap_predicted = e4 * lead.coefficient;
    let gap_alternative = e4 * gap_alternative_coefficient(&spec.f1, &spec.f2, z0);
    let tie_expected = lead.coefficient.abs() < 1e-14;
    let sign_winner = |g: f64| {
        if g > 0.0 {
            Winner::Upper
        } else if g < 0.0 {
            Winner::Lower
        } else {
            Winner::Tie
        }
    };
    let winner_side = if gap_fem.abs() < GAP_TIE && tie_expected { Winner::Tie } else { sign_winner(gap_fem) };
    let predicted_winner = if tie_expected { Winner::Tie } else { sign_winner(gap_predicted) };
    let reading_matched = (!tie_expected).then(|| {
        if (gap_fem - gap_predicted).abs() <= (gap_fem - gap_alternative).abs() {
            GapReading::CurvatureSum
        } else {
            GapReading::MeanCurvature
        }
    });
    let margin_over_variation = gap_fem.abs() / variation;
    let mut claims = Claims::new();
    if tie_expected {
        claims.insert("symmetric_gap_below_1e-6".into(), gap_fem.abs() < GAP_TIE);
    } else {
        claims.insert("winner_matches_prediction".into(), winner_side == predicted_winner);
        claims.insert("margin_at_least_3x_refinement_variation".into(), gap_fem.abs() >= 3.0 * variation);
    }
    Ok(NarrowComparison {
        config: config.clone(),
        z0,
        lower_gradsq: fine[0],
        upper_gradsq: fine[1],
        coarse_gradsq: *coarse,
        gap_fem,
        gap_fem_coarse,
        refinement_variation: variation,
        gap_predicted,
        gap_alternative,
        tie_expected,
        winner_side,
        predicted_winner,
        reading_matched,
        margin_over_variation,
        coarse_solve: SolveInfo::of(coarse_sol, config.rel_tol),
        fine_solve: SolveInfo::of(fine_sol, config.rel_tol),
        tie_tolerance: GAP_TIE,
        claims,
    })
}

impl Report for NarrowComparison {
    const NAME: &'static str = "narrow_compare";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new("mesh,lower_gradsq,upper_gradsq,gap");
        let [lo, hi] = self.coarse_gradsq;
        t.row(&["coarse".into(), num(lo), num(hi), num(self.gap_fem_coarse)]);
        t.row(&["fine".into(), num(self.lower_gradsq), num(self.upper_gradsq), num(self.gap_fem)]);
        t.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub a_semi: f64,
    pub eps_list: Vec<f64>,
    pub h: f64,
    pub rel_tol: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self { a_semi: 1.0, eps_list: vec![0.2, 0.1, 0.05], h: 0.01, rel_tol: DEFAULT_REL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointRow {
    pub eps: f64,
    pub exact_endpoint_grad: f64,
    pub exact_flat_grad: f64,
    pub exact_ratio: f64,
    pub fem_endpoint_grad: f64,
    pub fem_flat_grad: f64,
    pub fem_ratio: f64,
    pub endpoint_relative_error: f64,
    pub flat_relative_error: f64,
    pub fail_point: Point,
    pub fail_distance_to_endpoint: f64,
    pub solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub config: EndpointConfig,
    pub rows: Vec<EndpointRow>,
    /// Log-log slope of the FEM endpoint/flat ratio against `eps`.
    pub ratio_exponent: f64,
    pub endpoint_exponent: f64,
    pub exponent_tolerance: f64,
    pub fem_relative_tolerance: f64,
    pub claims: Claims,
}

/// Boundary gradient of the ellipse `x²/a² + y²/eps² < 1` at the ends of the
/// long axis against the flat sides, exact and by finite elements.
pub fn endpoint_exclusion_check(config: &EndpointConfig) -> Result<EndpointReport> {
    check_eps_list(&config.eps_list, 3)?;
    let a = config.a_semi;
    let rows: Vec<EndpointRow> = config
        .eps_list
        .par_iter()
        .map(|&eps| {
            let spec = DomainSpec::Ellipse { a_semi: a, b_semi: eps };
            let sol = solve_domain(&spec, config.h, config.rel_tol)?;
            let profile = boundary_profile(&sol)?;
            let lower = profile.side(0);
            let first = lower.samples.first().expect("non-empty side");
            let last = lower.samples.last().expect("non-empty side");
            let fem_endpoint = 0.5 * (first.dudn.abs() + last.dudn.abs());
            let (s_flat, _) = sol.mesh.project_to_side(0, &Point::new(0.0, -eps));
            let fem_flat = profile.dudn_at(0, s_flat).abs();
            let exact_endpoint = eval_ellipse_torsion(a, eps, a, 0.0).1.norm();
            let exact_flat = eval_ellipse_torsion(a, eps, 0.0, eps).1.norm();
            let report = fail_point(&profile, None)?;
            let p = report.global.point;
            let dist = (p - Point::new(a, 0.0)).norm().min((p - Point::new(-a, 0.0)).norm());
            Ok(EndpointRow {
                eps,
                exact_endpoint_grad: exact_endpoint,
                exact_flat_grad: exact_flat,
                exact_ratio: exact_endpoint / exact_flat,
                fem_endpoint_grad: fem_endpoint,
                fem_flat_grad: fem_flat,
                fem_ratio: fem_endpoint / fem_flat,
                endpoint_relative_error: (fem_endpoint / exact_endpoint - 1.0).abs(),
                flat_relative_error: (fem_flat / exact_flat - 1.0).abs(),
                fail_point: p,
                fail_distance_to_endpoint: dist,
                solve: SolveInfo::of(&sol, config.rel_tol),
            })
        })
        .collect::<Result<_>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.fem_ratio).collect();
    let ends: Vec<f64> = rows.iter().map(|r| r.fem_endpoint_grad).collect();
    let ratio_exponent = log_log_slope(&eps, &ratios);
    let endpoint_exponent = log_log_slope(&eps, &ends);
    let (exp_tol, fem_tol) = (0.1, 0.02);
    let mut claims = Claims::new();
    claims.insert("ratio_exponent_is_1".into(), (ratio_exponent - 1.0).abs() <= exp_tol);
    claims.insert("endpoint_exponent_is_2".into(), (endpoint_exponent - 2.0).abs() <= 2.0 * exp_tol);
    claims.insert(
        "fem_matches_exact_within_2_percent".into(),
        rows.iter().all(|r| r.endpoint_relative_error <= fem_tol && r.flat_relative_error <= fem_tol),
    );
    claims.insert(
        "fail_point_not_at_endpoint".into(),
        rows.iter().all(|r| r.fail_distance_to_endpoint > 10.0 * r.solve.h),
    );
    Ok(EndpointReport {
        config: config.clone(),
        rows,
        ratio_exponent,
        endpoint_exponent,
        exponent_tolerance: exp_tol,
        fem_relative_tolerance: fem_tol,
        claims,
    })
}

impl Report for EndpointReport {
    const NAME: &'static str = "endpoints";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let mut t = Table::new(
            "eps,exact_endpoint_grad,exact_flat_grad,exact_ratio,fem_endpoint_grad,fem_flat_grad,fem_ratio,fail_x,fail_y",
        );
        for r in &self.rows {
            t.row(&[
                num(r.eps),
                num(r.exact_endpoint_grad),
                num(r.exact_flat_grad),
                num(r.exact_ratio),
                num(r.fem_endpoint_grad),
                num(r.fem_flat_grad),
                num(r.fem_ratio),
                num(r.fail_point.x),
                num(r.fail_point.y),
            ]);
        }
        t.finish()
    }
}
