use std::sync::Arc;

use proptest::prelude::*;
use torsionlab::analysis::{boundary_profile, fail_point, CriticalKind};
use torsionlab::config::RunConfig;
use torsionlab::exact::{
    concentric_annulus_torsion, ellipse_torsion, eval_equilateral_torsion, gap_leading_term, narrow_coefficients,
    Family, Jet2,
};
use torsionlab::experiments::{suite_triangles, SuiteConfig};
use torsionlab::fem::{boundary_flux, solve_torsion, SolveOptions};
use torsionlab::geometry::{build_mesh, triangle_landmarks, DomainSpec, NarrowSpec, Point, PolyBoundaryFn};

fn triangle() -> impl Strategy<Value = DomainSpec> {
    // Apex above the unit base, away from degenerate shapes.
    (0.1f64..0.9, 0.3f64..1.2).prop_map(|(cx, cy)| DomainSpec::triangle([0.0, 0.0], [1.0, 0.0], [cx, cy]))
}

fn cubic() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ellipse_closed_form_solves_the_equation(a in 0.2f64..2.0, b in 0.05f64..2.0, sx in -0.99f64..0.99, sy in -1.0f64..1.0) {
        let x = a * sx;
        let y = b * sy * (1.0 - sx * sx).sqrt();
        let (jx, jy) = Jet2::variables(x, y);
        prop_assert!((ellipse_torsion(a, b, jx, jy).laplacian() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_closed_form_solves_the_equation(rho2 in 0.05f64..0.9, r in 0.0f64..1.0, theta in 0.0f64..6.3) {
        let rr = rho2 + r * (1.0 - rho2);
        let (jx, jy) = Jet2::variables(rr * theta.cos(), rr * theta.sin());
        prop_assert!((concentric_annulus_torsion(1.0, rho2, jx, jy).laplacian() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_closed_form_vanishes_on_the_sides(s in 0.0f64..1.0) {
        let r = 3f64.sqrt() / 3.0;
        for p in [Point::new(-r + 2.0 * r * s, 0.0), Point::new(r * s, 1.0 - s), Point::new(-r * s, 1.0 - s)] {
            prop_assert!(eval_equilateral_torsion(p.x, p.y).0.abs() < 1e-14);
        }
    }

    #[test]
    fn jet_quotient_undoes_product(a in 0.1f64..3.0, b in -2.0f64..2.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (jx, jy) = Jet2::variables(x, y);
        let num = jx * jx * jy + Jet2::constant(b);
        let den = Jet2::constant(a) + jx * jx + jy * jy;
        let back = (num * den) / den;
        for (p, q) in [(back.v, num.v), (back.dx, num.dx), (back.dy, num.dy), (back.dxx, num.dxx), (back.dxy, num.dxy), (back.dyy, num.dyy)] {
            prop_assert!((p - q).abs() < 1e-12 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn narrow_first_order_term_is_shared_and_reflection_swaps_sides(c1 in cubic(), c2 in cubic(), x in -0.9f64..0.9) {
        let f1 = PolyBoundaryFn::new(c1).unwrap();
        let f2 = PolyBoundaryFn::new(c2).unwrap();
        let direct = narrow_coefficients(&f1, &f2, x);
        let reflected = narrow_coefficients(&f2.scaled(-1.0), &f1.scaled(-1.0), x);
        prop_assert!((direct.lambda1 - reflected.lambda1).abs() < 1e-12);
        prop_assert!((direct.lambda2_lower - reflected.lambda2_upper).abs() < 1e-12);
        prop_assert!((direct.lambda2_upper - reflected.lambda2_lower).abs() < 1e-12);
    }

    #[test]
    fn gap_vanishes_for_opposite_curvatures(k1 in 0.2f64..2.0, k2 in 0.2f64..2.0, q in 0.1f64..2.0, r in -1.0f64..1.0) {
        let f1 = PolyBoundaryFn::new(vec![-k1, r, q]).unwrap();
        let f2 = PolyBoundaryFn::new(vec![k2, r, -q]).unwrap();
        let gap = gap_leading_term(&f1, &f2, -1.0, 1.0).unwrap();
        prop_assert!(gap.z0.abs() < 1e-9);
        prop_assert!(gap.coefficient.abs() < 1e-12);
    }

    #[test]
    fn narrow_mirror_is_an_involution(p1 in 0.5f64..2.0, p2 in 0.5f64..2.0, s1 in -0.9f64..0.9, s2 in -0.9f64..0.9, eps in 0.01f64..0.5) {
        // (1 - x²)(p + qx) vanishes at both ends; |q| < p/3 keeps it concave.
        let bump = |p: f64, s: f64| {
            let q = p * s / 3.0;
            vec![p, q, -p, -q]
        };
        let f1 = PolyBoundaryFn::new(bump(p1, s1)).unwrap().scaled(-1.0);
        let f2 = PolyBoundaryFn::new(bump(p2, s2)).unwrap();
        let spec = NarrowSpec::new(-1.0, 1.0, f1, f2, eps).unwrap();
        prop_assert_eq!(spec.mirrored().mirrored(), spec.clone());
        let (lo, hi) = spec.bounds(0.3);
        let (mlo, mhi) = spec.mirrored().bounds(0.3);
        prop_assert!((mlo + hi).abs() < 1e-15 && (mhi + lo).abs() < 1e-15);
    }

    #[test]
    fn run_config_round_trips(h in prop::option::of(1e-4f64..1.0), seed in prop::option::of(any::<u64>()), t in prop::option::of(prop::collection::vec(0.0f64..0.15, 0..4)), tilt in any::<bool>()) {
        let mut c = RunConfig::new("triangle-family");
        c.h = h;
        c.seed = seed;
        c.t_list = t;
        c.family = Some(if tilt { Family::Tilt } else { Family::Stretch });
        prop_assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn triangle_mesh_area_and_refinement(spec in triangle(), h in 0.05f64..0.3) {
        let coarse = build_mesh(&spec, h).unwrap();
        let fine = build_mesh(&spec, coarse.h / 2.0).unwrap();
        prop_assert_eq!(fine.n_elements(), 4 * coarse.n_elements());
        for m in [&coarse, &fine] {
            prop_assert!((m.area() - spec.area()).abs() < 1e-10 * spec.area());
        }
    }

    #[test]
    fn discrete_flux_balances_the_load(spec in triangle()) {
        let mesh = Arc::new(build_mesh(&spec, 0.05).unwrap());
        let sol = solve_torsion(mesh, SolveOptions::with_tol(1e-13)).unwrap();
        let total = boundary_flux(&sol).unwrap().weighted_sum();
        prop_assert!((total - spec.area()).abs() < 1e-8 * spec.area(), "{} vs {}", total, spec.area());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn random_triangles_have_one_maximum_per_side_and_fail_on_the_longest(seed in any::<u64>()) {
        let config = SuiteConfig { n: 1, seed, include_special: false, ..SuiteConfig::default() };
        let t = suite_triangles(&config).unwrap().remove(0);
        let [a, b, c] = t.vertices;
        let mesh = Arc::new(build_mesh(&t.spec(), 0.02).unwrap());
        let sol = solve_torsion(mesh, SolveOptions::with_tol(1e-12)).unwrap();
        let lm = triangle_landmarks(a, b, c).unwrap();
        let report = fail_point(&boundary_profile(&sol).unwrap(), Some(&lm)).unwrap();
        prop_assert_eq!(&report.maxima_per_side, &vec![1, 1, 1]);
        prop_assert!(report.per_side.iter().all(|p| p.kind == CriticalKind::Max));
        let check = report.landmarks_check.unwrap();
        prop_assert!(check.is_on_longest_side, "{:?}", t);
        prop_assert!(check.between_f_and_m, "{:?} {:?}", t, check);
    }
}
