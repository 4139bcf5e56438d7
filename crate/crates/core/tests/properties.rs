use std::f64::consts::PI;

use caustica::circular::{circular_transform_quadrature_with, transform_multiplier, Interpolation};
use caustica::field::{make_gaussian, read_csf2, write_csf2, Grid2D, ScalarField2D};
use caustica::geodesic::models::MagneticFlow;
use caustica::geodesic::{find_conjugate, ConjugateOptions, Vector};
use caustica::kernel_probe::fit_sqrt_singularity;
use caustica::sphere::{harmonic_field, random_axes, transform_circles};
use caustica::Execution;
use num_complex::Complex64;
use proptest::prelude::*;

fn small_grid() -> impl Strategy<Value = (usize, f64)> {
    (prop::sample::select(vec![64usize, 128]), 1.0f64..40.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csf2_round_trip_is_exact((n, l) in small_grid(), seed in any::<u64>(), complex in any::<bool>()) {
        let grid = Grid2D::new(n, l).unwrap();
        let vals: Vec<f64> = (0..2 * n * n)
            .map(|i| ((seed ^ i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) as f64) * 1e-12 - 3.0)
            .collect();
        let f = if complex {
            let c = vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            ScalarField2D::from_complex(grid, c).unwrap()
        } else {
            ScalarField2D::from_real(grid, vals[..n * n].to_vec()).unwrap()
        };
        let mut bytes = Vec::new();
        write_csf2(&f, &mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), 16 + n * n * if complex { 16 } else { 8 });
        prop_assert_eq!(&bytes[..4], b"CSF2");
        let g = read_csf2(bytes.as_slice()).unwrap();
        prop_assert_eq!(g.grid().n(), n);
        prop_assert_eq!(g.grid().period().to_bits(), l.to_bits());
        prop_assert_eq!(g.is_real(), !complex);
        prop_assert_eq!(g.values(), f.values());
    }

    #[test]
    fn truncated_csf2_is_rejected(cut in 1usize..4096) {
        let f = make_gaussian(Grid2D::new(64, 4.0).unwrap(), [0.0, 0.0], 1.0);
        let mut bytes = Vec::new();
        write_csf2(&f, &mut bytes).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(read_csf2(&bytes[..keep]).is_err());
    }

    #[test]
    fn multiplier_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, cx in -2.0f64..2.0, s in 0.5f64..1.5) {
        let grid = Grid2D::new(64, 16.0).unwrap();
        let f = make_gaussian(grid, [cx, 0.0], s);
        let g = make_gaussian(grid, [0.0, -cx], 1.0);
        let t = transform_multiplier();
        let lhs = t.apply(&f.scale(a).add(&g.scale(b)));
        let rhs = t.apply(&f).scale(a).add(&t.apply(&g).scale(b));
        let scale = 1.0 + lhs.norm_l2();
        prop_assert!(lhs.sub(&rhs).norm_l2() < 1e-12 * scale);
    }

    #[test]
    fn multiplier_commutes_with_grid_shifts(dr in -8isize..8, dc in -8isize..8) {
        let grid = Grid2D::new(64, 16.0).unwrap();
        let f = make_gaussian(grid, [0.7, -0.3], 0.9);
        let t = transform_multiplier();
        let a = t.apply(&f.roll(dr, dc));
        let b = t.apply(&f).roll(dr, dc);
        prop_assert!(a.sub(&b).norm_l2() < 1e-12 * (1.0 + b.norm_l2()));
    }

    #[test]
    fn circle_flow_conjugate_time_is_pi(x in -3.0f64..3.0, y in -3.0f64..3.0, angle in 0.0f64..(2.0 * PI)) {
        let model = MagneticFlow::circle2d();
        let p = Vector::from_vec(vec![x, y]);
        let theta = Vector::from_vec(vec![angle.cos(), angle.sin()]);
        let rec = find_conjugate(&model, &p, &theta, 10.0, &ConjugateOptions::default()).unwrap();
        let rec = rec.expect("circle flow always has a conjugate point");
        prop_assert!((rec.t_star - PI).abs() < 1e-8, "t* = {}", rec.t_star);
    }

    #[test]
    fn fit_recovers_a_pure_square_root(c in 0.1f64..10.0, lo in 0.005f64..0.02) {
        let hi = 0.25;
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let z = lo * (hi / lo).powf(i as f64 / 19.0);
                (z, c / z.sqrt())
            })
            .collect();
        let fit = fit_sqrt_singularity(&pts, (lo, hi), Some(c)).unwrap();
        prop_assert!((fit.exponent + 0.5).abs() < 1e-8);
        prop_assert!((fit.ratio().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn odd_harmonics_have_zero_great_circle_transform(l in prop::sample::select(vec![1usize, 3, 5]), m in -1i64..=1, seed in 0u64..1000) {
        let f = harmonic_field(32, 64, &[(l, m, 1.0)]).unwrap();
        let axes = random_axes(seed, 8);
        let t = transform_circles(&f, &axes, 256, Execution::Sequential).unwrap();
        for v in t {
            prop_assert!(v.abs() < 1e-8, "transform {v}");
        }
    }
}

#[test]
fn execution_modes_agree_bit_for_bit() {
    let grid = Grid2D::new(64, 12.0).unwrap();
    let f = make_gaussian(grid, [0.4, 0.1], 0.8);
    let q = |e| circular_transform_quadrature_with(&f, 128, Interpolation::Cubic, e).unwrap();
    assert_eq!(q(Execution::Sequential).values(), q(Execution::Parallel).values());
    let t = transform_multiplier();
    assert_eq!(
        t.apply_with(&f, Execution::Sequential).values(),
        t.apply_with(&f, Execution::Parallel).values()
    );
}
