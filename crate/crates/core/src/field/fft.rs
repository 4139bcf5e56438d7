use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Kind, ScalarField2D};
use crate::Execution;

/// Unitary 2D DFT. The result lives on the same grid; bin `(r, c)` holds
/// frequency `grid.freq_vec(r * n + c)`.
pub fn fft2(f: &ScalarField2D) -> ScalarField2D {
    fft2_with(f, Execution::default())
}

pub fn ifft2(f: &ScalarField2D) -> ScalarField2D {
    ifft2_with(f, Execution::default())
}

pub fn fft2_with(f: &ScalarField2D, exec: Execution) -> ScalarField2D {
    transform(f, false, exec)
}

pub fn ifft2_with(f: &ScalarField2D, exec: Execution) -> ScalarField2D {
    transform(f, true, exec)
}

fn transform(f: &ScalarField2D, inverse: bool, exec: Execution) -> ScalarField2D {
    let grid = f.grid();
    let n = grid.n();
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut data = f.values().to_vec();
    rows(&mut data, n, &plan, exec);
    let mut t = transpose(&data, n);
    rows(&mut t, n, &plan, exec);
    let mut out = transpose(&t, n);
    let s = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= s);
    ScalarField2D::with_values(grid, Kind::Complex, out)
}

fn rows(data: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>, exec: Execution) {
    // a block of rows per task keeps scratch allocation off the hot path
    let block = 16.min(n);
    exec.for_each_chunk(data, block * n, |_, chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(chunk, &mut scratch);
    });
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    const B: usize = 32;
    for rb in (0..n).step_by(B) {
        for cb in (0..n).step_by(B) {
            for r in rb..(rb + B).min(n) {
                for c in cb..(cb + B).min(n) {
                    out[c * n + r] = data[r * n + c];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid2D;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: Grid2D, seed: u64) -> ScalarField2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ScalarField2D::from_complex(grid, v).unwrap()
    }

    #[test]
    fn matches_direct_sum_on_8x8() {
        let g = Grid2D::new_unchecked(8, 3.0);
        let f = random_field(g, 1);
        let fast = fft2(&f);
        let mut err: f64 = 0.0;
        for kr in 0..8 {
            for kc in 0..8 {
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..8 {
                    for c in 0..8 {
                        let ph = -2.0 * PI * ((kr * r + kc * c) as f64) / 8.0;
                        s += f.get(r, c) * Complex64::from_polar(1.0, ph);
                    }
                }
                err = err.max((s / 8.0 - fast.get(kr, kc)).norm());
            }
        }
        assert!(err < 1e-13, "{err}");
        let a: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
        let b: f64 = fast.values().iter().map(|v| v.norm_sqr()).sum();
        assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn round_trip_all_sizes() {
        for (i, n) in [64, 128, 256, 512].into_iter().enumerate() {
            let g = Grid2D::new(n, 16.0).unwrap();
            let f = random_field(g, i as u64);
            let back = ifft2(&fft2(&f));
            let rel = back.sub(&f).norm_l2() / f.norm_l2();
            assert!(rel < 1e-12, "n={n}: {rel}");
        }
    }

    #[test]
    fn single_mode_spectra() {
        let g = Grid2D::new(64, 16.0).unwrap();
        let one = ScalarField2D::from_fn(g, |_| 1.0);
        let s = fft2(&one);
        assert!((s.get(0, 0).re - 64.0).abs() < 1e-10);
        let rest: f64 = s.values()[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(rest < 1e-10);

        // lattice frequency (3, -5)
        let (kx, ky) = (g.freq(3), g.freq(64 - 5));
        let e = ScalarField2D::from_fn_complex(g, |p| Complex64::from_polar(1.0, kx * p[0] + ky * p[1]));
        let s = fft2(&e);
        let peak = (64 - 5) * 64 + 3;
        for (i, v) in s.values().iter().enumerate() {
            if i == peak {
                assert!((v.norm() - 64.0).abs() < 1e-9);
            } else {
                assert!(v.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn execution_modes_bit_identical() {
        let g = Grid2D::new(128, 16.0).unwrap();
        let f = random_field(g, 9);
        assert_eq!(
            fft2_with(&f, Execution::Sequential),
            fft2_with(&f, Execution::Parallel)
        );
    }
}
