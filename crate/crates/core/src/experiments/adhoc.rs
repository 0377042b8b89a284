use serde::{Deserialize, Serialize};

use super::{num, solve_domain, Claims, Report, SolveInfo, Table, DEFAULT_REL_TOL};
use crate::analysis::{
    boundary_profile, fail_point, trace_nodal_line_with_flux, write_paths_csv, BoundaryProfile, FailPointReport,
};
use crate::error::Result;
use crate::geometry::{triangle_landmarks, DomainSpec, Point};

/// Relative tolerance on `∫ ∂u/∂n ds = |Ω|` for the discrete flux.
const FLUX_BALANCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub domain: DomainSpec,
    pub h: f64,
    pub rel_tol: f64,
}

impl SolveConfig {
    pub fn new(domain: DomainSpec, h: f64) -> Self {
        Self { domain, h, rel_tol: DEFAULT_REL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub config: SolveConfig,
    pub solve: SolveInfo,
    pub max_value: f64,
    pub mesh_area: f64,
    /// `Σ w_j (∂u/∂n)_j`, which must equal the mesh area.
    pub flux_total: f64,
    pub claims: Claims,
    #[serde(skip)]
    profile_csv: String,
    #[serde(skip)]
    solution_csv: String,
}

impl SolveReport {
    /// Nodal values as CSV `node_id,x,y,u`.
    pub fn solution_csv(&self) -> &str {
        &self.solution_csv
    }
}

fn profile_csv(profile: &BoundaryProfile) -> Result<String> {
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

/// Mesh, solve and boundary profile of one domain.
pub fn solve_experiment(config: &SolveConfig) -> Result<SolveReport> {
    let sol = solve_domain(&config.domain, config.h, config.rel_tol)?;
    let profile = boundary_profile(&sol)?;
    let mesh_area = sol.mesh.area();
    let flux_total = profile.flux.weighted_sum();
    let mut claims = Claims::new();
    claims.insert("solver_converged".into(), sol.relative_residual <= config.rel_tol);
    claims.insert("flux_balances_area".into(), (flux_total - mesh_area).abs() <= FLUX_BALANCE_TOL * mesh_area);
    let mut buf = Vec::new();
    sol.write_csv(&mut buf)?;
    Ok(SolveReport {
        config: config.clone(),
        solve: SolveInfo::of(&sol, config.rel_tol),
        max_value: sol.max_value(),
        mesh_area,
        flux_total,
        claims,
        profile_csv: profile_csv(&profile)?,
        solution_csv: String::from_utf8_lossy(&buf).into_owned(),
    })
}

impl Report for SolveReport {
    const NAME: &'static str = "solve";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    /// Boundary profile `side,s,x,y,dudn,gradsq`.
    fn csv(&self) -> String {
        self.profile_csv.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailPointConfig {
    pub domain: DomainSpec,
    pub h: f64,
    /// Direction of the derivative whose nodal line is traced.
    pub direction: Point,
    pub rel_tol: f64,
}

impl FailPointConfig {
    pub fn new(domain: DomainSpec, h: f64) -> Self {
        Self { domain, h, direction: Point::new(1.0, 0.0), rel_tol: DEFAULT_REL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailPointExperimentReport {
    pub config: FailPointConfig,
    pub solve: SolveInfo,
    pub report: FailPointReport,
    pub n_paths: usize,
    pub claims: Claims,
    #[serde(skip)]
    profile_csv: String,
    #[serde(skip)]
    paths_csv: String,
}

impl FailPointExperimentReport {
    /// Nodal paths as CSV `path_id,k,x,y`.
    pub fn paths_csv(&self) -> &str {
        &self.paths_csv
    }

    /// Boundary profile `side,s,x,y,dudn,gradsq`.
    pub fn profile_csv(&self) -> &str {
        &self.profile_csv
    }
}

/// Fail point of one domain; for triangles, its position relative to the
/// altitude foot and midpoint of the longest side.
pub fn fail_point_experiment(config: &FailPointConfig) -> Result<FailPointExperimentReport> {
    let direction = config.direction.normalize();
    let sol = solve_domain(&config.domain, config.h, config.rel_tol)?;
    let profile = boundary_profile(&sol)?;
    let landmarks = match config.domain {
        DomainSpec::Triangle { a, b, c } => Some(triangle_landmarks(a, b, c)?),
        _ => None,
    };
    let report = fail_point(&profile, landmarks.as_ref())?;
    let paths = trace_nodal_line_with_flux(&sol, &profile.flux, direction)?;
    let mut claims = Claims::new();
    claims.insert("solver_converged".into(), sol.relative_residual <= config.rel_tol);
    if let Some(check) = &report.landmarks_check {
        claims.insert("fail_point_on_longest_side".into(), check.is_on_longest_side);
        claims.insert("fail_point_between_foot_and_midpoint".into(), check.between_f_and_m);
    }
    let mut buf = Vec::new();
    write_paths_csv(&paths, &mut buf)?;
    Ok(FailPointExperimentReport {
        config: config.clone(),
        solve: SolveInfo::of(&sol, config.rel_tol),
        n_paths: paths.len(),
        report,
        claims,
        profile_csv: profile_csv(&profile)?,
        paths_csv: String::from_utf8_lossy(&buf).into_owned(),
    })
}

impl Report for FailPointExperimentReport {
    const NAME: &'static str = "failpoint";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    /// Per-side maxima `side,s,x,y,grad_sq,kind`.
    fn csv(&self) -> String {
        let mut t = Table::new("side,s,x,y,grad_sq,kind");
        for p in &self.report.per_side {
            let kind = serde_json::to_value(p.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            t.row(&[p.side_id.to_string(), num(p.s), num(p.point.x), num(p.point.y), num(p.grad_sq), kind]);
        }
        t.finish()
    }
}
