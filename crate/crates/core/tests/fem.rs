use std::sync::Arc;

use torsionlab::exact::{eval_equilateral_torsion, rectangle_short_side_gradient};
use torsionlab::fem::{boundary_flux, solve_poisson, solve_torsion, Rhs, SolveOptions};
use torsionlab::geometry::{build_mesh, DomainSpec, Point};

fn omega0() -> DomainSpec {
    let r = 3f64.sqrt() / 3.0;
    DomainSpec::triangle([-r, 0.0], [r, 0.0], [0.0, 1.0])
}

fn disk() -> DomainSpec {
    DomainSpec::Ellipse { a_semi: 1.0, b_semi: 1.0 }
}

fn solve(spec: &DomainSpec, h: f64) -> torsionlab::fem::TorsionSolution {
    let mesh = Arc::new(build_mesh(spec, h).unwrap());
    solve_torsion(mesh, SolveOptions::default()).unwrap()
}

#[test]
fn disk_centre_value() {
    let sol = solve(&disk(), 0.02);
    let u0 = sol.value_at(&Point::new(0.0, 0.0)).unwrap();
    assert!((u0 - 0.25).abs() < 5e-4, "u(0) = {u0}");
    assert!(sol.min_interior_value() > 0.0);
}

#[test]
fn disk_gradient_and_flux() {
    let sol = solve(&disk(), 0.02);
    let g = sol.gradient_at(&Point::new(0.5, 0.0)).unwrap();
    assert!((g - Point::new(-0.25, 0.0)).norm() < 2e-3, "{g:?}");
    let flux = boundary_flux(&sol).unwrap();
    for side in 0..2 {
        for s in flux.side_samples(side) {
            assert!((s.dudn - 0.5).abs() < 1e-3, "flux {} at {:?}", s.dudn, s.point);
        }
    }
    assert!((flux.weighted_sum() - sol.mesh.area()).abs() < 1e-8);
}

#[test]
fn disk_flux_converges() {
    let err = |h: f64| {
        let sol = solve(&disk(), h);
        let flux = boundary_flux(&sol).unwrap();
        (0..2).flat_map(|k| flux.side_samples(k)).map(|s| (s.dudn - 0.5).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 >= 3.5, "flux errors {e1} {e2}");
}

#[test]
fn disk_values_converge() {
    let err = |h: f64| {
        let sol = solve(&disk(), h);
        sol.mesh
            .nodes
            .iter()
            .zip(&sol.nodal_values)
            .map(|(p, u)| (u - (1.0 - p.norm_squared()) / 4.0).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 >= 7.0, "value errors {e1} {e2}");
}

#[test]
fn equilateral_matches_closed_form() {
    let sol = solve(&omega0(), 0.01);
    let err = sol
        .mesh
        .nodes
        .iter()
        .zip(&sol.nodal_values)
        .map(|(p, u)| (u - eval_equilateral_torsion(p.x, p.y).0).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-5, "max nodal error {err}");
    let p = Point::new(0.0, 0.5);
    let g = sol.gradient_at(&p).unwrap();
    assert!((g - eval_equilateral_torsion(p.x, p.y).1).norm() < 2e-3);
    let flux = boundary_flux(&sol).unwrap();
    let base_mid = flux.at(0, 3f64.sqrt() / 3.0);
    assert!((base_mid - 0.25).abs() < 1e-3, "{base_mid}");
    assert!((flux.weighted_sum() - sol.mesh.area()).abs() < 1e-8);
}

#[test]
fn gradient_vanishes_at_maximum() {
    let sol = solve(&omega0(), 0.02);
    let (i, _) = sol.nodal_values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let g = sol.gradient_at(&sol.mesh.nodes[i]).unwrap();
    assert!(g.norm() < 5e-3, "{g:?}");
}

#[test]
fn rectangle_short_side_flux() {
    let eps = 0.2;
    let sol = solve(&DomainSpec::Rectangle { eps }, 0.01);
    let flux = boundary_flux(&sol).unwrap();
    let f = flux.at(3, eps);
    let series = rectangle_short_side_gradient(eps, 20000);
    assert!((f - series).abs() < 1e-3, "fem {f} series {series}");
}

#[test]
fn rectangle_interior_values() {
    let eps = 0.2;
    let sol = solve(&DomainSpec::Rectangle { eps }, 0.01);
    for (x, y) in [(0.5, 0.0), (0.3, 0.1), (0.05, -0.15), (0.9, 0.05)] {
        let u = sol.value_at(&Point::new(x, y)).unwrap();
        let v = torsionlab::exact::eval_rectangle_torsion(eps, x, y, 2000);
        assert!((u - v).abs() < 1e-5, "({x},{y}): {u} vs {v}");
    }
}

#[test]
fn nonzero_dirichlet_reproduces_quadratic() {
    let mesh = Arc::new(build_mesh(&omega0(), 0.1).unwrap());
    // -Δ(x² + xy) = -2.
    let exact = |p: &Point| p.x * p.x + p.x * p.y;
    let sol = solve_poisson(mesh, &Rhs::new("-2", |_| -2.0), exact, SolveOptions::with_tol(1e-13)).unwrap();
    for (p, u) in sol.mesh.nodes.iter().zip(&sol.nodal_values) {
        assert!((u - exact(p)).abs() < 1e-11);
    }
}

#[test]
fn annulus_compatibility() {
    let sol = solve(&DomainSpec::Annulus { rho1: 1.0, rho2: 0.3, offset: 0.2 }, 0.05);
    let flux = boundary_flux(&sol).unwrap();
    assert!((flux.weighted_sum() - sol.mesh.area()).abs() < 1e-8);
}

#[test]
fn mirror_symmetry_of_values() {
    let sol = solve(&omega0(), 0.05);
    let nodes = &sol.mesh.nodes;
    for (i, p) in nodes.iter().enumerate() {
        let j = nodes.iter().position(|q| (q - Point::new(-p.x, p.y)).norm() < 1e-12).unwrap();
        assert!((sol.nodal_values[i] - sol.nodal_values[j]).abs() < 1e-10);
    }
}

#[test]
fn csv_headers() {
    let sol = solve(&omega0(), 0.25);
    let mut buf = Vec::new();
    sol.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("node_id,x,y,u\n"));
    let mut buf = Vec::new();
    boundary_flux(&sol).unwrap().write_csv(&mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("side_id,s,x,y,dudn\n"));
}
