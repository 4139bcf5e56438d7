use std::f64::consts::PI;

use approx::assert_relative_eq;
use caustica::circular::{normal_kernel_analytic, probe_normal_kernel};
use caustica::field::Grid2D;
use caustica::geodesic::models::MagneticFlow;
use caustica::geodesic::{conormal_bundle, find_conjugate, ConjugateOptions, Vector};
use caustica::suite::{self, ModelSpec};
use caustica::Execution;

#[test]
fn probed_normal_kernel_matches_closed_form_away_from_the_edge() {
    let grid = Grid2D::new(1024, 8.0).unwrap();
    let radii = [0.5, 1.0, 1.4];
    let probes = probe_normal_kernel(grid, 0.03, &radii, Execution::default()).unwrap();
    for p in probes {
        let exact = normal_kernel_analytic(p.r).unwrap();
        assert_relative_eq!(p.extrapolated, exact, max_relative = 1e-2);
    }
}

#[test]
fn horizontal_magnetic_rays_focus_at_pi_over_alpha() {
    for alpha in [0.5, 1.0, 2.0] {
        let model = MagneticFlow::magnetic3d(alpha);
        let p = Vector::zeros(3);
        for k in 0..6 {
            let a = k as f64 * PI / 3.0;
            let theta = Vector::from_vec(vec![a.cos(), a.sin(), 0.0]);
            let rec = find_conjugate(&model, &p, &theta, 20.0, &ConjugateOptions::default())
                .unwrap()
                .unwrap();
            assert_relative_eq!(rec.t_star, PI / alpha, epsilon = 1e-8);
        }
    }
}

#[test]
fn horizontal_magnetic_conormal_has_unit_eta_opposite_xi() {
    let model = MagneticFlow::magnetic3d(1.0);
    let p = Vector::zeros(3);
    let v = Vector::from_vec(vec![PI, 0.0, 0.0]);
    let c = conormal_bundle(&model, &p, &v, &ConjugateOptions::default()).unwrap();
    assert_relative_eq!(c.eta.norm(), 1.0, epsilon = 1e-8);
    assert_relative_eq!((&c.eta + &c.xi).norm(), 0.0, epsilon = 1e-8);
}

#[test]
fn model_locus_for_the_circle_passes() {
    let spec = ModelSpec::parse("circle2d").unwrap();
    let dirs = suite::patch_directions(2, "ring:12").unwrap();
    let r = suite::model_locus(&spec, &spec.default_point(), &dirs, 10.0, Execution::default()).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert_eq!(r.table.rows.len(), 12);
}

#[test]
fn small_sphere_run_passes_and_repeats_exactly() {
    let cfg = suite::SphereConfig {
        n_lat: 32,
        n_lon: 64,
        circles: 12,
        ..Default::default()
    };
    let a = suite::sphere_kernel(&cfg).unwrap();
    let b = suite::sphere_kernel(&cfg).unwrap();
    assert!(a.passed(), "{:?}", a.checks);
    assert_eq!(a.table.rows, b.table.rows);
    assert_eq!(a.meta, b.meta);
}

#[test]
fn sequential_and_parallel_reports_agree() {
    let spec = ModelSpec::parse("magnetic3d:2").unwrap();
    let dirs = suite::patch_directions(3, "fib:12").unwrap();
    let p = spec.default_point();
    let s = suite::model_locus(&spec, &p, &dirs, 10.0, Execution::Sequential).unwrap();
    let q = suite::model_locus(&spec, &p, &dirs, 10.0, Execution::Parallel).unwrap();
    assert_eq!(s.table.rows, q.table.rows);
}

#[test]
fn strong_convexity_suite_passes() {
    let r = suite::scon().unwrap();
    assert!(r.passed(), "{:?}", r.checks);
}
