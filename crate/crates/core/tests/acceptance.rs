//! Acceptance criteria 1-12. Each test writes one `PASS`/`FAIL` line to the
//! real stdout, so the lines show up without `--nocapture`.

use std::io::Write;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use torsionlab::exact::{eval_equilateral_torsion, rectangle_short_side_gradient, Family};
use torsionlab::experiments::{
    annulus_experiment, endpoint_exclusion_check, narrow_side_comparison, narrow_sweep, random_triangle_suite,
    triangle_family, validate_oracles, w2_bound_experiment, AnnulusConfig, EndpointConfig, FamilyConfig,
    NarrowCompareConfig, NarrowSweepConfig, SuiteConfig, SuiteReport, TriangleKind, W2Config, Winner,
};
use torsionlab::fem::{boundary_flux, solve_torsion, SolveOptions, TorsionSolution};
use torsionlab::geometry::{build_mesh, DomainSpec, NarrowSpec, PolyBoundaryFn};

fn verdict(id: u32, title: &str, pass: bool, detail: String) {
    let line = format!("{} criterion {id:>2} {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {id} failed: {detail}");
}

fn solve(spec: &DomainSpec, h: f64) -> TorsionSolution {
    let mesh = Arc::new(build_mesh(spec, h).unwrap());
    solve_torsion(mesh, SolveOptions::with_tol(1e-13)).unwrap()
}

fn suite() -> &'static (SuiteReport, f64) {
    static SUITE: OnceLock<(SuiteReport, f64)> = OnceLock::new();
    SUITE.get_or_init(|| {
        let start = Instant::now();
        let report = random_triangle_suite(&SuiteConfig::default()).unwrap();
        (report, start.elapsed().as_secs_f64())
    })
}

#[test]
fn criterion_01_oracle_identities() {
    let start = Instant::now();
    let report = validate_oracles();
    let seconds = start.elapsed().as_secs_f64();
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let fd = report.checks.iter().find(|c| c.name == "rectangle_series_laplacian_fd").unwrap();
    let symbolic = report
        .checks
        .iter()
        .filter(|c| c.name.ends_with("_laplacian") && c.name != "rectangle_series_laplacian_fd")
        .map(|c| c.value)
        .fold(0.0, f64::max);
    let pass = failed.is_empty() && symbolic <= 1e-12 && fd.value <= 1e-4 && seconds < 1.0;
    verdict(
        1,
        "oracle identities",
        pass,
        format!(
            "symbolic residual {symbolic:.2e}, series fd residual {:.2e}, {seconds:.3} s, failed {failed:?}",
            fd.value
        ),
    );
}

#[test]
fn criterion_02_fem_against_oracles() {
    let start = Instant::now();
    let r = 3f64.sqrt() / 3.0;
    let tri = solve(&DomainSpec::triangle([-r, 0.0], [r, 0.0], [0.0, 1.0]), 0.01);
    let nodal = tri
        .mesh
        .nodes
        .iter()
        .zip(&tri.nodal_values)
        .map(|(p, u)| (u - eval_equilateral_torsion(p.x, p.y).0).abs())
        .fold(0.0, f64::max);

    let disk = solve(&DomainSpec::Ellipse { a_semi: 1.0, b_semi: 1.0 }, 0.02);
    let flux = boundary_flux(&disk).unwrap();
    let disk_err =
        flux.side_samples(0).iter().chain(&flux.side_samples(1)).map(|s| (s.dudn - 0.5).abs()).fold(0.0, f64::max);

    let eps = 0.2;
    let rect = solve(&DomainSpec::Rectangle { eps }, 0.01);
    // Side 3 is x = 0, parametrised from (0, eps) downwards.
    let rect_fem = boundary_flux(&rect).unwrap().at(3, eps);
    let rect_err = (rect_fem - rectangle_short_side_gradient(eps, 20000)).abs();
    let seconds = start.elapsed().as_secs_f64();

    let pass = nodal <= 1e-5 && disk_err <= 1e-3 && rect_err <= 1e-3 && seconds < 30.0;
    verdict(
        2,
        "fem against oracles",
        pass,
        format!("nodal {nodal:.2e}, disk flux {disk_err:.2e}, rectangle flux {rect_err:.2e}, {seconds:.1} s"),
    );
}

#[test]
fn criterion_03_narrow_expansion() {
    let start = Instant::now();
    let report = narrow_sweep(&NarrowSweepConfig::default()).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let lambda2: Vec<f64> = report.rows.iter().filter(|r| r.eps == 0.05).map(|r| r.lambda2_fem).collect();
    let lambda_ok = !lambda2.is_empty() && lambda2.iter().all(|l| (l / -4.0 - 1.0).abs() <= 0.05);
    let slope_ok = report.remainder_slope.iter().all(|s| *s >= 5.5);
    verdict(
        3,
        "narrow expansion",
        lambda_ok && slope_ok && seconds < 120.0,
        format!("lambda2 at eps 0.05 {lambda2:?}, remainder slopes {:?}, {seconds:.1} s", report.remainder_slope),
    );
}

#[test]
fn criterion_04_narrow_fail_point_convergence() {
    // Mirror-asymmetric pair: (1 - x²)(1 ∓ x/4) keeps the thickest section at 0.
    let f1 = PolyBoundaryFn::new(vec![-1.0, 0.25, 1.0, -0.25]).unwrap();
    let f2 = PolyBoundaryFn::new(vec![1.0, 0.25, -1.0, -0.25]).unwrap();
    let config = NarrowSweepConfig {
        spec: NarrowSpec::new(-1.0, 1.0, f1, f2, 0.1).unwrap(),
        refinement_check: false,
        ..NarrowSweepConfig::default()
    };
    let report = narrow_sweep(&config).unwrap();
    let mut fail_x = report.fail_x.clone();
    fail_x.sort_by(|p, q| q.eps.total_cmp(&p.eps));
    let dist: Vec<f64> = fail_x.iter().map(|f| f.x.abs()).collect();
    let decreasing = dist.windows(2).all(|w| w[1] < w[0]);
    let last_ok = fail_x.last().is_some_and(|f| f.eps == 0.05 && f.x.abs() <= 0.05);
    verdict(
        4,
        "narrow fail-point convergence",
        decreasing && last_ok,
        format!("|x_fail| over eps 0.2, 0.1, 0.05: {dist:?}"),
    );
}

#[test]
fn criterion_05_curvature_tie_break() {
    let config = NarrowCompareConfig::default();
    let direct = narrow_side_comparison(&config).unwrap();
    let mirrored =
        narrow_side_comparison(&NarrowCompareConfig { spec: config.spec.mirrored(), ..config.clone() }).unwrap();
    let margin = direct.lower_gradsq - direct.upper_gradsq;
    let pass = margin > 0.0
        && margin >= 3.0 * direct.refinement_variation
        && direct.winner_side == Winner::Lower
        && mirrored.winner_side == Winner::Upper;
    verdict(
        5,
        "curvature tie-break",
        pass,
        format!(
            "lower - upper {margin:.3e}, refinement variation {:.3e}, winners {:?} / mirrored {:?}",
            direct.refinement_variation, direct.winner_side, mirrored.winner_side
        ),
    );
}

#[test]
fn criterion_06_endpoint_exclusion() {
    let report = endpoint_exclusion_check(&EndpointConfig::default()).unwrap();
    let exponent_ok = (report.ratio_exponent - 1.0).abs() <= 0.1;
    let a = report.config.a_semi;
    let away = report.rows.iter().all(|r| {
        let p = r.fail_point;
        (p.x.abs() - a).hypot(p.y) > r.solve.h
    });
    let min_dist = report.rows.iter().map(|r| r.fail_distance_to_endpoint).fold(f64::INFINITY, f64::min);
    verdict(
        6,
        "endpoint exclusion",
        exponent_ok && away,
        format!("ratio exponent {:.4}, closest fail point to (±a, 0) {min_dist:.3}", report.ratio_exponent),
    );
}

#[test]
fn criterion_07_triangle_location_and_uniqueness() {
    let (report, seconds) = suite();
    let random: Vec<_> = report.rows.iter().filter(|r| r.triangle.kind == TriangleKind::Scalene).collect();
    let passes = random
        .iter()
        .filter(|r| {
            let slack = 1.5 * r.solve.h;
            let (lo, hi) = (r.s_foot.min(r.s_midpoint), r.s_foot.max(r.s_midpoint));
            let longest = r.side_lengths.iter().cloned().fold(0.0, f64::max);
            r.maxima_per_side.iter().all(|&n| n == 1)
                && r.side_lengths[r.global_side] >= longest * (1.0 - 1e-12)
                && r.s_fail >= lo - slack
                && r.s_fail <= hi + slack
        })
        .count();
    verdict(
        7,
        "triangle location and uniqueness",
        random.len() == 20 && passes == 20 && *seconds < 180.0,
        format!("{passes}/{} at h = {}, {seconds:.1} s", random.len(), report.config.h),
    );
}

fn family(id: u32, kind: Family) {
    let report = triangle_family(&FamilyConfig { family: kind, ..FamilyConfig::default() }).unwrap();
    let ((lo, hi), coeff) = match kind {
        Family::Stretch => ((7.0 / 24.0, 0.5), 1.0 / 32.0),
        Family::Tilt => ((0.0, 5.0 / 12.0), 1.0 / 8.0),
    };
    let pass = report.rows.len() == 2
        && report.rows.iter().all(|r| r.ratio > lo && r.ratio < hi && r.difference > coeff * r.t * r.t);
    let ratios: Vec<f64> = report.rows.iter().map(|r| r.ratio).collect();
    let diffs: Vec<f64> = report.rows.iter().map(|r| r.difference_over_t2).collect();
    verdict(
        id,
        &format!("{kind:?} family"),
        pass,
        format!("x/t {ratios:?} in ({lo:.4}, {hi:.4}); gradient gap / t² {diffs:?} > {coeff}"),
    );
}

#[test]
fn criterion_08_stretched_family() {
    family(8, Family::Stretch);
}

#[test]
fn criterion_09_tilted_family() {
    family(9, Family::Tilt);
}

#[test]
fn criterion_10_mixed_derivative_bounds() {
    let report = w2_bound_experiment(&W2Config::default()).unwrap();
    let c0: Vec<f64> = report.fits.iter().map(|f| f.c0).collect();
    let radii: Vec<f64> = report.fits.iter().map(|f| f.r_fit).collect();
    let mid = report.fits.iter().find(|f| f.r_fit == 0.15).unwrap();
    let spread = c0.iter().map(|c| (c - mid.c0).abs()).fold(0.0, f64::max);
    let pass = radii == [0.1, 0.15, 0.2]
        && c0.iter().all(|c| *c > 0.0 && *c < 0.3125)
        && spread <= 0.02
        && report.min_barrier_gap >= -1e-8
        && (mid.c1 + 0.75).abs() <= 0.05;
    verdict(
        10,
        "mixed-derivative bounds",
        pass,
        format!("c0 {c0:?}, spread {spread:.2e}, min(g - w2) {:.2e}, c1 {:.4}", report.min_barrier_gap, mid.c1),
    );
}

#[test]
fn criterion_11_annulus() {
    let config = AnnulusConfig::default();
    assert_eq!((config.rho1, config.rho2, config.offset), (1.0, 0.3, 0.2));
    let report = annulus_experiment(&config).unwrap();
    let dist = report.global_distance_to_q0.unwrap_or(f64::INFINITY);
    let pass = dist <= 1e-2
        && report.inner_max > report.outer_max
        && report.monotonicity_violations == 0
        && report.concentric.relative_spread <= 1e-3;
    verdict(
        11,
        "annulus",
        pass,
        format!(
            "distance to (-0.1, 0) {dist:.2e}, inner {:.4} > outer {:.4}, violations {}, concentric spread {:.2e}",
            report.inner_max, report.outer_max, report.monotonicity_violations, report.concentric.relative_spread
        ),
    );
}

#[test]
fn criterion_12_nodal_line_structure() {
    let (report, _) = suite();
    let mut bad = Vec::new();
    for r in &report.rows {
        let h = r.solve.h;
        let shape_ok = match (r.triangle.kind, r.deviation) {
            (TriangleKind::Scalene, Some(d)) => d > 5.0 * h,
            (_, Some(d)) => d < 2.0 * h,
            (_, None) => false,
        };
        if !(r.n_paths == 1 && r.path_base_to_apex && r.tangent_angle_deg.is_some_and(|a| a <= 5.0) && shape_ok) {
            bad.push(r.triangle.label.clone());
        }
    }
    let worst_tangent = report.rows.iter().filter_map(|r| r.tangent_angle_deg).fold(0.0, f64::max);
    verdict(
        12,
        "nodal-line structure",
        bad.is_empty(),
        format!("{} triangles, worst tangent {worst_tangent:.2} deg, failing {bad:?}", report.rows.len()),
    );
}
