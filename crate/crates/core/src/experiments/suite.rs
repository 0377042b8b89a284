use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{num, solve_domain, Claims, Report, SolveInfo, Table, DEFAULT_REL_TOL};
use crate::analysis::{
    boundary_profile, fail_point, nodal_tangent_angle_at_boundary, trace_nodal_line_with_flux, CriticalKind, PathEnd,
};
use crate::error::{Error, Result};
use crate::geometry::{triangle_landmarks, DomainSpec, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    pub h: f64,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    /// Smallest `|F - M|` on the base accepted for a random triangle.
    pub min_foot_gap: f64,
    /// Append an equilateral and an isosceles triangle.
    pub include_special: bool,
    pub rel_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 20,
            seed: 7,
            h: 0.01,
            min_angle_deg: 20.0,
            max_angle_deg: 140.0,
            min_foot_gap: 0.15,
            include_special: true,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleKind {
    Scalene,
    Isosceles,
    Equilateral,
}

/// Triangle with its longest side `AB` on the x-axis from `(0,0)` to `(1,0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteTriangle {
    pub label: String,
    pub kind: TriangleKind,
    pub vertices: [Point; 3],
}

impl SuiteTriangle {
    fn from_angles(label: String, kind: TriangleKind, alpha: f64, beta: f64) -> Self {
        let gamma = std::f64::consts::PI - alpha - beta;
        let b = beta.sin() / gamma.sin();
        let c = Point::new(b * alpha.cos(), b * alpha.sin());
        Self { label, kind, vertices: [Point::new(0.0, 0.0), Point::new(1.0, 0.0), c] }
    }

    pub fn spec(&self) -> DomainSpec {
        let [a, b, c] = self.vertices;
        DomainSpec::Triangle { a, b, c }
    }

    /// Interior angles at A, B, C in degrees.
    pub fn angles_deg(&self) -> [f64; 3] {
        let v = self.vertices;
        std::array::from_fn(|k| {
            let (p, q, r) = (v[k], v[(k + 1) % 3], v[(k + 2) % 3]);
            (q - p).angle(&(r - p)).to_degrees()
        })
    }
}

/// Seeded random triangles followed by the special ones.
///
/// Angles are drawn uniformly and rejected until all three lie in the
/// configured range and the foot of the altitude from `C` is at least
/// `min_foot_gap` from the midpoint of `AB`. The largest angle is put at `C`,
/// so `AB` is the longest side and the diameter is 1.
pub fn suite_triangles(config: &SuiteConfig) -> Result<Vec<SuiteTriangle>> {
    let (lo, hi) = (config.min_angle_deg, config.max_angle_deg);
    if !(lo > 0.0 && lo < 60.0 && hi > 60.0 && hi < 180.0 - lo) {
        return Err(Error::InvalidArgument(format!("angle range [{lo}, {hi}] is empty or degenerate")));
    }
    if !(0.0..0.5).contains(&config.min_foot_gap) {
        return Err(Error::InvalidArgument("min_foot_gap must lie in [0, 0.5)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.n + 2);
    let mut attempts = 0usize;
    while out.len() < config.n {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::NotFound("no admissible triangle after 100000 draws".into()));
        }
        let a1: f64 = rng.gen_range(lo..hi);
        let a2: f64 = rng.gen_range(lo..hi);
        let mut angles = [a1, a2, 180.0 - a1 - a2];
        if angles[2] < lo || angles[2] > hi {
            continue;
        }
        angles.sort_by(f64::total_cmp);
        // Alternate the smaller two between A and B so the apex leans both ways.
        let (alpha, beta) = if rng.gen_bool(0.5) { (angles[0], angles[1]) } else { (angles[1], angles[0]) };
        let t = SuiteTriangle::from_angles(
            format!("random_{:02}", out.len()),
            TriangleKind::Scalene,
            alpha.to_radians(),
            beta.to_radians(),
        );
        if (t.vertices[2].x - 0.5).abs() < config.min_foot_gap {
            continue;
        }
        out.push(t);
    }
    if config.include_special {
        let third = std::f64::consts::FRAC_PI_3;
        out.push(SuiteTriangle::from_angles("equilateral".into(), TriangleKind::Equilateral, third, third));
        let base = 50f64.to_radians();
        out.push(SuiteTriangle::from_angles("isosceles_50".into(), TriangleKind::Isosceles, base, base));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub triangle: SuiteTriangle,
    pub angles_deg: [f64; 3],
    pub side_lengths: [f64; 3],
    pub maxima_per_side: Vec<usize>,
    pub per_side_grad_sq: Vec<f64>,
    pub global_side: usize,
    pub n_fail_points: usize,
    pub s_fail: f64,
    pub s_foot: f64,
    pub s_midpoint: f64,
    pub on_longest_side: bool,
    pub between_f_and_m: bool,
    /// Longer side implies larger per-side maximum, for every pair.
    pub side_order_consistent: bool,
    pub n_paths: usize,
    /// Exactly one path, from the base to the apex `C`.
    pub path_base_to_apex: bool,
    pub contact_s: Option<f64>,
    pub contact_gap: Option<f64>,
    pub tangent_angle_deg: Option<f64>,
    /// Largest distance of the path from the vertical through `C`.
    pub deviation: Option<f64>,
    pub location_pass: bool,
    pub nodal_pass: bool,
    pub solve: SolveInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteTolerances {
    /// Contact point vs fail point, in units of `h`.
    pub contact_h: f64,
    pub tangent_deg: f64,
    pub isosceles_deviation_h: f64,
    pub scalene_deviation_h: f64,
    pub isosceles_midpoint_h: f64,
    /// Vertex snapping distance for the apex end of a path, in units of `h`.
    pub apex_h: f64,
}

const TOLERANCES: SuiteTolerances = SuiteTolerances {
    contact_h: 2.0,
    tangent_deg: 5.0,
    isosceles_deviation_h: 2.0,
    scalene_deviation_h: 5.0,
    isosceles_midpoint_h: 1.5,
    apex_h: 2.0,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub rows: Vec<SuiteRow>,
    pub n_random: usize,
    pub random_location_passes: usize,
    pub random_nodal_passes: usize,
    pub tolerances: SuiteTolerances,
    pub claims: Claims,
}

fn analyse(t: &SuiteTriangle, config: &SuiteConfig) -> Result<SuiteRow> {
    let tol = TOLERANCES;
    let [a, b, c] = t.vertices;
    let landmarks = triangle_landmarks(a, b, c)?;
    let sol = solve_domain(&t.spec(), config.h, config.rel_tol)?;
    let h = sol.mesh.h;
    let profile = boundary_profile(&sol)?;
    let report = fail_point(&profile, Some(&landmarks))?;
    let check = report.landmarks_check.clone().expect("landmarks given");
    let per_side_grad_sq: Vec<f64> = report.per_side.iter().map(|p| p.grad_sq).collect();
    let lengths = landmarks.side_lengths;
    let side_order_consistent = (0..3).all(|i| {
        (0..3).all(|j| !(lengths[i] > lengths[j] * (1.0 + 1e-9)) || per_side_grad_sq[i] > per_side_grad_sq[j])
    });
    let unique =
        report.maxima_per_side.iter().all(|&n| n == 1) && report.per_side.iter().all(|p| p.kind == CriticalKind::Max);

    let paths = trace_nodal_line_with_flux(&sol, &profile.flux, Point::new(1.0, 0.0))?;
    let single = match paths.as_slice() {
        [p] => Some(p),
        _ => None,
    };
    let path_base_to_apex = single.is_some_and(|p| {
        matches!(p.start, PathEnd::Side { side_id: 0, .. })
            && matches!(p.end, PathEnd::Vertex { point } if (point - c).norm() <= tol.apex_h * h)
    });
    let (contact_s, contact_gap, tangent_angle_deg, deviation) = match single {
        Some(p) if path_base_to_apex => {
            let (_, s) = p.ends_on_side().expect("starts on the base");
            (
                Some(s),
                Some((s - report.per_side[0].s).abs()),
                Some(nodal_tangent_angle_at_boundary(p, &sol.mesh)?),
                Some(p.max_deviation(c, Point::new(0.0, 1.0))),
            )
        }
        _ => (None, None, None, None),
    };
    let deviation_ok = deviation.is_some_and(|d| match t.kind {
        TriangleKind::Scalene => d > tol.scalene_deviation_h * h,
        _ => d < tol.isosceles_deviation_h * h,
    });
    let nodal_pass = path_base_to_apex
        && contact_gap.is_some_and(|g| g <= tol.contact_h * h)
        && tangent_angle_deg.is_some_and(|d| d <= tol.tangent_deg)
        && deviation_ok;
    let location_pass = unique && check.is_on_longest_side && check.between_f_and_m;
    Ok(SuiteRow {
        triangle: t.clone(),
        angles_deg: t.angles_deg(),
        side_lengths: lengths,
        maxima_per_side: report.maxima_per_side.clone(),
        per_side_grad_sq,
        global_side: report.global.side_id,
        n_fail_points: report.fail_points.len(),
        s_fail: check.s_fail,
        s_foot: check.s_foot,
        s_midpoint: check.s_midpoint,
        on_longest_side: check.is_on_longest_side,
        between_f_and_m: check.between_f_and_m,
        side_order_consistent,
        n_paths: paths.len(),
        path_base_to_apex,
        contact_s,
        contact_gap,
        tangent_angle_deg,
        deviation,
        location_pass,
        nodal_pass,
        solve: SolveInfo::of(&sol, config.rel_tol),
    })
}

/// Fail-point location, uniqueness and nodal-line structure over a seeded
/// set of triangles.
pub fn random_triangle_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if config.n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let triangles = suite_triangles(config)?;
    let rows: Vec<SuiteRow> = triangles.par_iter().map(|t| analyse(t, config)).collect::<Result<_>>()?;
    let random: Vec<&SuiteRow> = rows.iter().filter(|r| r.triangle.kind == TriangleKind::Scalene).collect();
    let special = |kind: TriangleKind| rows.iter().filter(move |r| r.triangle.kind == kind);
    let all = |f: &dyn Fn(&SuiteRow) -> bool| rows.iter().all(f);
    let tol = TOLERANCES;

    let mut claims = Claims::new();
    claims.insert("unique_critical_point_per_side".into(), all(&|r| r.maxima_per_side.iter().all(|&n| n == 1)));
    claims.insert("fail_point_on_longest_side".into(), all(&|r| r.on_longest_side));
    claims.insert("fail_point_between_foot_and_midpoint".into(), all(&|r| r.between_f_and_m));
    claims.insert("side_order_matches_lengths".into(), all(&|r| r.side_order_consistent));
    claims.insert("nodal_single_path_base_to_apex".into(), all(&|r| r.path_base_to_apex));
    claims.insert(
        "nodal_contact_matches_fail_point".into(),
        all(&|r| r.contact_gap.is_some_and(|g| g <= tol.contact_h * r.solve.h)),
    );
    claims.insert(
        "nodal_tangent_perpendicular".into(),
        all(&|r| r.tangent_angle_deg.is_some_and(|d| d <= tol.tangent_deg)),
    );
    claims.insert(
        "scalene_path_bent".into(),
        random.iter().all(|r| r.deviation.is_some_and(|d| d > tol.scalene_deviation_h * r.solve.h)),
    );
    if config.include_special {
        claims.insert(
            "symmetric_path_straight".into(),
            rows.iter()
                .filter(|r| r.triangle.kind != TriangleKind::Scalene)
                .all(|r| r.deviation.is_some_and(|d| d < tol.isosceles_deviation_h * r.solve.h)),
        );
        claims.insert(
            "equilateral_three_fail_points".into(),
            special(TriangleKind::Equilateral).all(|r| r.n_fail_points == 3),
        );
        claims.insert(
            "isosceles_fail_at_midpoint".into(),
            special(TriangleKind::Isosceles)
                .all(|r| (r.s_fail - r.s_midpoint).abs() <= tol.isosceles_midpoint_h * r.solve.h),
        );
    }
    Ok(SuiteReport {
        config: config.clone(),
        n_random: random.len(),
        random_location_passes: random.iter().filter(|r| r.location_pass).count(),
        random_nodal_passes: random.iter().filter(|r| r.nodal_pass).count(),
        rows,
        tolerances: tol,
        claims,
    })
}

impl Report for SuiteReport {
    const NAME: &'static str = "suite";

    fn claims(&self) -> &Claims {
        &self.claims
    }

    fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut t = Table::new(
            "label,kind,cx,cy,maxima_ab,maxima_bc,maxima_ca,global_side,s_fail,s_foot,s_midpoint,on_longest,between_f_m,\
             n_paths,contact_s,tangent_deg,deviation,location_pass,nodal_pass",
        );
        for r in &self.rows {
            let kind = match r.triangle.kind {
                TriangleKind::Scalene => "scalene",
                TriangleKind::Isosceles => "isosceles",
                TriangleKind::Equilateral => "equilateral",
            };
            t.row(&[
                r.triangle.label.clone(),
                kind.into(),
                num(r.triangle.vertices[2].x),
                num(r.triangle.vertices[2].y),
                r.maxima_per_side[0].to_string(),
                r.maxima_per_side[1].to_string(),
                r.maxima_per_side[2].to_string(),
                r.global_side.to_string(),
                num(r.s_fail),
                num(r.s_foot),
                num(r.s_midpoint),
                r.on_longest_side.to_string(),
                r.between_f_and_m.to_string(),
                r.n_paths.to_string(),
                opt(r.contact_s),
                opt(r.tangent_angle_deg),
                opt(r.deviation),
                r.location_pass.to_string(),
                r.nodal_pass.to_string(),
            ]);
        }
        t.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic_and_admissible() {
        let config = SuiteConfig::default();
        let a = suite_triangles(&config).unwrap();
        assert_eq!(a, suite_triangles(&config).unwrap());
        assert_eq!(a.len(), 22);
        for t in &a {
            let ang = t.angles_deg();
            assert!((ang.iter().sum::<f64>() - 180.0).abs() < 1e-9);
            assert!(ang.iter().all(|x| (20.0 - 1e-9..=140.0 + 1e-9).contains(x)), "{ang:?}");
            assert!(ang[2] >= ang[0] - 1e-9 && ang[2] >= ang[1] - 1e-9);
        }
        let other = suite_triangles(&SuiteConfig { seed: 8, ..config }).unwrap();
        assert_ne!(a[0], other[0]);
    }
}
