//! The unit-radius circular transform `Rf(x) = ∫_{|y-x|=1} f dℓ`.
//!
//! `R` is a convolution with arclength on the unit circle, so it is the
//! radial multiplier `2π J₀(|ξ|)` and the normal operator is `(2π J₀)²`.
//! Above `|ξ| = 12` the square splits into an elliptic part `A₀` and two
//! phase-shifted parts `F±` carrying `e^{±2i|ξ|}`.

pub mod bessel;
mod multiplier;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use bessel::{j0, BesselAsymptotics};
pub use multiplier::RadialMultiplier;

use crate::field::{fft2_with, ifft2_with, make_gaussian, Grid2D, Kind, ScalarField2D};
use crate::{Error, Execution, Result};

/// Below this radius the decomposed symbols are frozen at their value here.
pub const LOW_FREQ_CAP: f64 = 0.5;

/// How `f` is read off-grid by the quadrature realization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    Bilinear,
    Cubic,
}

/// `(2π/m) Σ_a f(x + e^{2πia/m})`, evaluated at every grid point.
pub fn circular_transform_quadrature(f: &ScalarField2D, m: usize) -> Result<ScalarField2D> {
    circular_transform_quadrature_with(f, m, Interpolation::Bilinear, Execution::default())
}

pub fn circular_transform_quadrature_with(
    f: &ScalarField2D,
    m: usize,
    interp: Interpolation,
    exec: Execution,
) -> Result<ScalarField2D> {
    if m < 64 {
        return Err(Error::InvalidArgument(format!("quadrature size {m} below 64")));
    }
    let grid = f.grid();
    let n = grid.n();
    let stencil = circle_stencil(m, grid.spacing(), interp);
    let vals = f.values();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    exec.for_each_chunk(&mut out, n, |r, row| {
        for &((dr, dc), w) in &stencil {
            let src = ((r as isize + dr).rem_euclid(n as isize)) as usize * n;
            let src = &vals[src..src + n];
            // row[c] += w * src[(c + dc) mod n], split into two contiguous runs
            let shift = dc.rem_euclid(n as isize) as usize;
            let (head, tail) = row.split_at_mut(n - shift);
            for (o, v) in head.iter_mut().zip(&src[shift..]) {
                *o += v * w;
            }
            for (o, v) in tail.iter_mut().zip(&src[..shift]) {
                *o += v * w;
            }
        }
    });
    Ok(ScalarField2D::with_values(grid, f.kind(), out))
}

/// Interpolation weights of all `m` circle nodes, merged per grid offset.
///
/// Every node `x + e^{iθ}` sits at the same cell offset and fractional
/// position for every grid point `x`, so the quadrature is a fixed stencil.
fn circle_stencil(m: usize, h: f64, interp: Interpolation) -> Vec<((isize, isize), f64)> {
    let mut acc = std::collections::BTreeMap::new();
    let w = 2.0 * PI / m as f64;
    for a in 0..m {
        let t = 2.0 * PI * a as f64 / m as f64;
        let (sx, sy) = (t.cos() / h, t.sin() / h);
        let (fx, fy) = (sx.floor(), sy.floor());
        let (i0, j0) = (fx as isize, fy as isize);
        let (tx, ty) = (sx - fx, sy - fy);
        match interp {
            Interpolation::Bilinear => {
                let wx = [1.0 - tx, tx];
                let wy = [1.0 - ty, ty];
                for (a, wa) in wy.iter().enumerate() {
                    for (b, wb) in wx.iter().enumerate() {
                        *acc.entry((j0 + a as isize, i0 + b as isize)).or_insert(0.0) += w * wa * wb;
                    }
                }
            }
            Interpolation::Cubic => {
                let wx = lagrange4(tx);
                let wy = lagrange4(ty);
                for (a, wa) in wy.iter().enumerate() {
                    for (b, wb) in wx.iter().enumerate() {
                        let key = (j0 + a as isize - 1, i0 + b as isize - 1);
                        *acc.entry(key).or_insert(0.0) += w * wa * wb;
                    }
                }
            }
        }
    }
    acc.into_iter().collect()
}

fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// `2π J₀(|ξ|)`.
pub fn transform_multiplier() -> RadialMultiplier {
    RadialMultiplier::real("R", |z| 2.0 * PI * j0(z))
}

/// `(2π J₀(|ξ|))²`.
pub fn normal_multiplier() -> RadialMultiplier {
    RadialMultiplier::real("R*R", |z| {
        let r = 2.0 * PI * j0(z);
        r * r
    })
}

pub fn circular_transform_multiplier(f: &ScalarField2D) -> ScalarField2D {
    transform_multiplier().apply(f)
}

pub fn normal_operator(f: &ScalarField2D) -> ScalarField2D {
    normal_multiplier().apply(f)
}

/// Schwartz kernel of `R*R` at distance `r`: `4 / (r √(4 - r²))`.
pub fn normal_kernel_analytic(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 2.0) {
        return Err(Error::Domain(format!("kernel defined for 0 < r < 2, got {r}")));
    }
    Ok(4.0 / (r * (4.0 - r * r).sqrt()))
}

/// Kernel of `R*R` estimated by applying it to a unit-mass Gaussian bump at
/// the origin and sampling the result at `(r, 0)`; Richardson extrapolation
/// over widths `width` and `width/2` removes the `O(width²)` smoothing error.
#[derive(Clone, Debug, serde::Serialize)]
pub struct KernelProbe {
    pub r: f64,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn probe_normal_kernel(grid: Grid2D, width: f64, radii: &[f64], exec: Execution) -> Result<Vec<KernelProbe>> {
    if !(width > 0.0) || width > 0.05 * grid.period() {
        return Err(Error::InvalidArgument(format!("bump width {width} out of range")));
    }
    let reach = radii.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    // periodic copies of the output, supported within radius 2, must miss
    // the sampled points
    if reach + 2.0 + 8.0 * width > grid.period() {
        return Err(Error::InvalidGrid("period too small for the probed radii".into()));
    }
    let nm = normal_multiplier();
    let at = |b: f64| {
        let bump = make_gaussian(grid, [0.0, 0.0], b);
        let mass = bump.values().iter().map(|v| v.re).sum::<f64>() * grid.spacing() * grid.spacing();
        let out = nm.apply_with(&bump, exec);
        radii.iter().map(|&r| out.sample_cubic([r, 0.0]).re / mass).collect::<Vec<_>>()
    };
    let coarse = at(width);
    let fine = at(0.5 * width);
    Ok(radii
        .iter()
        .zip(coarse.iter().zip(&fine))
        .map(|(&r, (&c, &f))| KernelProbe {
            r,
            coarse: c,
            fine: f,
            extrapolated: (4.0 * f - c) / 3.0,
        })
        .collect())
}

fn capped(z: f64) -> f64 {
    z.max(LOW_FREQ_CAP)
}

/// `A₀ = 4π (P² + Q²) / |ξ|` with P, Q truncated to `terms`.
pub fn a0_multiplier(terms: usize) -> Result<RadialMultiplier> {
    let b = asymptotics(terms)?;
    Ok(RadialMultiplier::real("A0", move |z| {
        let z = capped(z);
        let (p, q) = b.pq(z);
        4.0 * PI * (p * p + q * q) / z
    }))
}

/// Reciprocal of [`a0_multiplier`].
pub fn a0_inverse_multiplier(terms: usize) -> Result<RadialMultiplier> {
    let b = asymptotics(terms)?;
    Ok(RadialMultiplier::real("A0^-1", move |z| {
        let z = capped(z);
        let (p, q) = b.pq(z);
        let a = 4.0 * PI * (p * p + q * q) / z;
        1.0 / a.max(1e-6)
    }))
}

/// `F± = ∓2πi (P ± iQ)² e^{±2i|ξ|} / |ξ|`; `sign` is +1 or -1.
pub fn f_multiplier(terms: usize, sign: i8) -> Result<RadialMultiplier> {
    let b = asymptotics(terms)?;
    let s = sign.signum() as f64;
    let label = if sign > 0 { "F+" } else { "F-" };
    Ok(RadialMultiplier::complex(label, 2 * sign.signum(), move |z| {
        f_symbol(&b, z, s)
    }))
}

/// The `F±` symbol without its phase.
pub(crate) fn f_symbol(b: &BesselAsymptotics, z: f64, s: f64) -> Complex64 {
    let z = capped(z);
    let (p, q) = b.pq(z);
    let w = Complex64::new(p, s * q);
    Complex64::new(0.0, -s * 2.0 * PI) * w * w / z
}

fn asymptotics(terms: usize) -> Result<BesselAsymptotics> {
    if terms < 1 {
        return Err(Error::InvalidArgument("at least one asymptotic term required".into()));
    }
    Ok(BesselAsymptotics::new(terms))
}

/// Output of [`decompose`].
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub a0: ScalarField2D,
    pub f_plus: ScalarField2D,
    pub f_minus: ScalarField2D,
    /// `R*R f - (A₀ + F₊ + F₋) f`.
    pub residual: ScalarField2D,
}

pub fn decompose(f: &ScalarField2D, terms: usize) -> Result<Decomposition> {
    decompose_with(f, terms, Execution::default())
}

pub fn decompose_with(f: &ScalarField2D, terms: usize, exec: Execution) -> Result<Decomposition> {
    let a0 = a0_multiplier(terms)?;
    let fp = f_multiplier(terms, 1)?;
    let fm = f_multiplier(terms, -1)?;
    let nm = normal_multiplier();
    let spec = fft2_with(f, exec);
    let back = |m: &RadialMultiplier| ifft2_with(&m.apply_spectrum(&spec, exec), exec);
    let mut a0f = back(&a0);
    let f_plus = back(&fp);
    let f_minus = back(&fm);
    let mut full = back(&nm);
    if f.is_real() {
        a0f = a0f.into_real();
        full = full.into_real();
    }
    let sum = a0f.add(&f_plus).add(&f_minus);
    let mut residual = full.sub(&sum);
    if f.is_real() {
        // F₋ = conj(F₊) on real input, so the sum is real up to rounding
        residual = residual.into_real();
    }
    Ok(Decomposition {
        a0: a0f,
        f_plus,
        f_minus,
        residual,
    })
}

/// Zeroes all Fourier content with `|ξ| < cutoff`.
pub fn high_pass(f: &ScalarField2D, cutoff: f64) -> ScalarField2D {
    let exec = Execution::default();
    let m = RadialMultiplier::real("high-pass", move |z| if z < cutoff { 0.0 } else { 1.0 });
    let out = ifft2_with(&m.apply_spectrum(&fft2_with(f, exec), exec), exec);
    if f.kind() == Kind::Real {
        out.into_real()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_gaussian, Grid2D};

    #[test]
    fn constant_maps_to_circumference() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let one = ScalarField2D::from_fn(g, |_| 1.0);
        let q = circular_transform_quadrature(&one, 128).unwrap();
        assert!(q.values().iter().all(|v| (v.re - 2.0 * PI).abs() < 1e-12));
        let m = circular_transform_multiplier(&one);
        assert!(m.values().iter().all(|v| (v.re - 2.0 * PI).abs() < 1e-12));
        let nn = normal_operator(&one);
        assert!(nn.values().iter().all(|v| (v.re - 4.0 * PI * PI).abs() < 1e-10));
    }

    #[test]
    fn plane_wave_eigenfunction() {
        let g = Grid2D::new(512, 16.0).unwrap();
        let (kx, ky) = (g.freq(2), g.freq(1));
        let e = ScalarField2D::from_fn_complex(g, |p| Complex64::from_polar(1.0, kx * p[0] + ky * p[1]));
        let lam = 2.0 * PI * j0(kx.hypot(ky));
        let q = circular_transform_quadrature_with(&e, 1024, Interpolation::Cubic, Execution::default()).unwrap();
        let err = q.sub(&e.scale(lam)).norm_l2() / (lam.abs() * e.norm_l2());
        assert!(err < 1e-6, "{err}");
        let nn = normal_operator(&e);
        let err = nn.sub(&e.scale(lam * lam)).norm_l2() / (lam * lam * e.norm_l2());
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn bilinear_error_follows_its_budget() {
        // linear interpolation of e^{iθt} averages to 1 - θ²/12 per axis
        let g = Grid2D::new(512, 16.0).unwrap();
        let h = g.spacing();
        let (kx, ky) = (g.freq(20), g.freq(7));
        let e = ScalarField2D::from_fn_complex(g, |p| Complex64::from_polar(1.0, kx * p[0] + ky * p[1]));
        let q = circular_transform_quadrature(&e, 1024).unwrap();
        let lam = 2.0 * PI * j0(kx.hypot(ky));
        let err = q.sub(&e.scale(lam)).norm_l2() / (lam.abs() * e.norm_l2());
        let budget = ((kx * h).powi(2) + (ky * h).powi(2)) / 12.0;
        assert!(err < 1.5 * budget && err > 0.1 * budget, "{err} vs {budget}");
    }

    #[test]
    fn translation_equivariance() {
        let g = Grid2D::new(128, 8.0).unwrap();
        let f = make_gaussian(g, [0.4, -0.3], 0.5);
        let h = g.spacing();
        let shifted = make_gaussian(g, [0.4 + 5.0 * h, -0.3 - 3.0 * h], 0.5);
        let a = circular_transform_quadrature(&f, 256).unwrap().roll(-3, 5);
        let b = circular_transform_quadrature(&shifted, 256).unwrap();
        assert!(a.sub(&b).max_abs() < 1e-10);
    }

    #[test]
    fn normal_equals_transform_twice() {
        let g = Grid2D::new(128, 16.0).unwrap();
        let f = make_gaussian(g, [0.3, -0.2], 0.4);
        let twice = circular_transform_multiplier(&circular_transform_multiplier(&f));
        let diff = twice.sub(&normal_operator(&f)).max_abs();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn kernel_special_values() {
        assert!((normal_kernel_analytic(2f64.sqrt()).unwrap() - 2.0).abs() < 1e-14);
        let r: f64 = 2.0 - 1e-10;
        assert!(((2.0 - r).sqrt() * normal_kernel_analytic(r).unwrap() - 1.0).abs() < 1e-6);
        assert!((1e-9 * normal_kernel_analytic(1e-9).unwrap() - 2.0).abs() < 1e-9);
        assert!(normal_kernel_analytic(0.0).is_err());
        assert!(normal_kernel_analytic(2.0).is_err());
    }

    #[test]
    fn split_is_exact_in_the_symbol() {
        // with full-accuracy P, Q the three symbols add up to (2πJ₀)²
        for z in [12.5, 20.0, 47.3] {
            let (p, q) = bessel::pq_full(z);
            let a0 = 4.0 * PI * (p * p + q * q) / z;
            let w = Complex64::new(p, q);
            let fp = Complex64::new(0.0, -2.0 * PI) * w * w / z * Complex64::from_polar(1.0, 2.0 * z);
            let total = a0 + fp + fp.conj();
            let exact = (2.0 * PI * j0(z)).powi(2);
            assert!((total.re - exact).abs() < 1e-12 && total.im.abs() < 1e-15, "z={z}");
            // |F±| = A₀/2
            assert!((fp.norm() - a0 / 2.0).abs() < 1e-14);
        }
        assert!(a0_multiplier(0).is_err());
    }

    #[test]
    fn bump_probe_recovers_kernel() {
        let grid = Grid2D::new(1024, 8.0).unwrap();
        let radii = [0.3, 0.8, 1.2, 1.7];
        let out = probe_normal_kernel(grid, 0.024, &radii, Execution::default()).unwrap();
        for p in out {
            let exact = normal_kernel_analytic(p.r).unwrap();
            assert!((p.extrapolated / exact - 1.0).abs() < 1e-3, "{}: {}", p.r, p.extrapolated / exact);
            assert!((p.extrapolated - exact).abs() < (p.coarse - exact).abs());
        }
    }
}
