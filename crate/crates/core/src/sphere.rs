//! The great-circle transform on S² and the invisibility of odd functions.
//!
//! Fields live on a Gauss–Legendre latitude by uniform longitude grid. With
//! an even number of longitudes the grid is closed under the antipodal map
//! `J`, so bilinear interpolation commutes with `J` and odd fields integrate
//! to zero over great circles up to rounding.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::{Error, Execution, Result};

pub type Point = [f64; 3];

/// Samples on Gauss–Legendre latitudes (ascending, poles excluded) and
/// longitudes `2πj/n_lon`.
#[derive(Clone, Debug)]
pub struct ScalarFieldS2 {
    lats: Vec<f64>,
    weights: Vec<f64>,
    n_lon: usize,
    /// Row-major, one row per latitude.
    values: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

impl ScalarFieldS2 {
    pub fn zeros(n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat < 32 {
            return Err(Error::InvalidGrid(format!("n_lat = {n_lat} must be at least 32")));
        }
        if n_lon < 4 || n_lon % 2 == 1 {
            return Err(Error::InvalidGrid(format!("n_lon = {n_lon} must be even and at least 4")));
        }
        let (x, weights) = gauss_legendre(n_lat);
        Ok(Self {
            lats: x.iter().map(|s| s.asin()).collect(),
            weights,
            n_lon,
            values: vec![0.0; n_lat * n_lon],
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(n_lat: usize, n_lon: usize, f: F) -> Result<Self>
    where
        F: Fn(Point) -> f64,
    {
        let mut out = Self::zeros(n_lat, n_lon)?;
        for i in 0..n_lat {
            for j in 0..n_lon {
                let p = out.node(i, j);
                out.values[i * n_lon + j] = f(p);
            }
        }
        Ok(out)
    }

    pub fn n_lat(&self) -> usize {
        self.lats.len()
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn latitudes(&self) -> &[f64] {
        &self.lats
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn lon(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_lon as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        to_cartesian(self.lats[i], self.lon(j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_lon + j]
    }

    /// `f∘J`.
    pub fn antipodal(&self) -> Self {
        let (nl, nm) = (self.n_lat(), self.n_lon);
        let mut out = self.clone();
        for i in 0..nl {
            for j in 0..nm {
                out.values[i * nm + j] = self.get(nl - 1 - i, (j + nm / 2) % nm);
            }
        }
        out
    }

    /// Largest `|f(x) + f(-x)|` over the nodes.
    pub fn odd_defect(&self) -> f64 {
        let flipped = self.antipodal();
        self.values
            .iter()
            .zip(&flipped.values)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max)
    }

    /// `∫_{S²} f` by Gauss–Legendre in `sin(lat)` and the trapezoid in longitude.
    pub fn integral(&self) -> f64 {
        let dl = TAU / self.n_lon as f64;
        (0..self.n_lat())
            .map(|i| self.weights[i] * self.values[i * self.n_lon..(i + 1) * self.n_lon].iter().sum::<f64>())
            .sum::<f64>()
            * dl
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_lat() != other.n_lat() || self.n_lon != other.n_lon {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().zip(&other.values) {
            *a += b;
        }
        Ok(out)
    }

    /// Longitude-linear value on row `i`.
    fn row_at(&self, i: usize, lon: f64) -> f64 {
        let u = lon.rem_euclid(TAU) / TAU * self.n_lon as f64;
        let j = u.floor();
        let f = u - j;
        let j0 = (j as usize) % self.n_lon;
        let j1 = (j0 + 1) % self.n_lon;
        (1.0 - f) * self.get(i, j0) + f * self.get(i, j1)
    }

    /// Bilinear interpolation in `(lat, lon)`; inside the polar caps the
    /// latitude segment runs over the pole to the row at `lon + π`.
    pub fn interpolate(&self, x: Point) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let lat = (x[2] / r).clamp(-1.0, 1.0).asin();
        let lon = x[1].atan2(x[0]);
        let n = self.n_lat();
        let top = self.lats[n - 1];
        if lat > top {
            let t = (lat - top) / (PI - 2.0 * top);
            return (1.0 - t) * self.row_at(n - 1, lon) + t * self.row_at(n - 1, lon + PI);
        }
        let bottom = self.lats[0];
        if lat < bottom {
            let t = (bottom - lat) / (PI + 2.0 * bottom);
            return (1.0 - t) * self.row_at(0, lon) + t * self.row_at(0, lon + PI);
        }
        let i = (self.lats.partition_point(|&l| l <= lat) - 1).min(n - 2);
        let f = (lat - self.lats[i]) / (self.lats[i + 1] - self.lats[i]);
        (1.0 - f) * self.row_at(i, lon) + f * self.row_at(i + 1, lon)
    }
}

pub fn to_cartesian(lat: f64, lon: f64) -> Point {
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

/// Real orthonormal spherical harmonic `Y_l^m`; `m < 0` is the sine part.
pub fn real_harmonic(l: usize, m: i64, x: Point) -> f64 {
    let am = m.unsigned_abs() as usize;
    assert!(am <= l, "|m| must not exceed l");
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let z = x[2] / r;
    let s = (x[0] * x[0] + x[1] * x[1]).sqrt() / r;
    let mut pmm = (0.25 / PI).sqrt();
    for k in 1..=am {
        pmm *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    let p = if l == am {
        pmm
    } else {
        let mut p0 = pmm;
        let mut p1 = ((2 * am + 3) as f64).sqrt() * z * pmm;
        for k in am + 2..=l {
            let (kf, mf) = (k as f64, am as f64);
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0).powi(2) - mf * mf) / (4.0 * (kf - 1.0).powi(2) - 1.0)).sqrt();
            let p2 = a * (z * p1 - b * p0);
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    if m == 0 {
        return p;
    }
    let phi = x[1].atan2(x[0]);
    let ang = if m > 0 { (am as f64 * phi).cos() } else { (am as f64 * phi).sin() };
    std::f64::consts::SQRT_2 * p * ang
}

/// `Σ c·Y_l^m` sampled on the grid.
pub fn harmonic_field(n_lat: usize, n_lon: usize, terms: &[(usize, i64, f64)]) -> Result<ScalarFieldS2> {
    for &(l, m, _) in terms {
        if m.unsigned_abs() as usize > l {
            return Err(Error::InvalidArgument(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
    }
    ScalarFieldS2::from_fn(n_lat, n_lon, |x| terms.iter().map(|&(l, m, c)| c * real_harmonic(l, m, x)).sum())
}

/// Orthonormal `e1, e2` spanning the plane normal to `axis`.
fn circle_frame(axis: Point) -> Result<(Point, Point)> {
    let r = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument("circle axis must be a nonzero vector".into()));
    }
    let a = [axis[0] / r, axis[1] / r, axis[2] / r];
    let helper = if a[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = normalize(cross(a, helper));
    let e2 = cross(a, e1);
    Ok((e1, e2))
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Point) -> Point {
    let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

/// Trapezoid rule over the great circle normal to `axis` with `m` nodes.
/// Odd `m` is rounded up so that every node has its antipode in the rule.
pub fn great_circle_transform(f: &ScalarFieldS2, axis: Point, m: usize) -> Result<f64> {
    if m < 128 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 128")));
    }
    let m = m + m % 2;
    let (e1, e2) = circle_frame(axis)?;
    let h = TAU / m as f64;
    let mut acc = 0.0;
    for k in 0..m {
        let (s, c) = (k as f64 * h).sin_cos();
        acc += f.interpolate([c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]);
    }
    Ok(acc * h)
}

/// The same integral for the exact function, for reference quadratures.
pub fn great_circle_integral<F: Fn(Point) -> f64>(f: F, axis: Point, m: usize) -> Result<f64> {
    let (e1, e2) = circle_frame(axis)?;
    let h = TAU / m as f64;
    let mut acc = 0.0;
    for k in 0..m {
        let (s, c) = (k as f64 * h).sin_cos();
        acc += f([c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]);
    }
    Ok(acc * h)
}

pub fn transform_circles(f: &ScalarFieldS2, axes: &[Point], m: usize, exec: Execution) -> Result<Vec<f64>> {
    exec.map(axes.len(), |i| great_circle_transform(f, axes[i], m)).into_iter().collect()
}

/// Uniformly distributed unit vectors, reproducible from `seed`.
pub fn random_axes(seed: u64, count: usize) -> Vec<Point> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..TAU);
            let s = (1.0 - z * z).sqrt();
            [s * phi.cos(), s * phi.sin(), z]
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleValue {
    pub axis: Point,
    pub even: f64,
    pub sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CancellationReport {
    pub circles: Vec<CircleValue>,
    /// Largest `|T(f_even + f_odd) - T(f_even)|`.
    pub max_abs_diff: f64,
    pub odd_defect: f64,
}

/// Transforms of `f_even` and `f_even + f_odd` over `circles`.
pub fn antipodal_cancellation_check(
    f_even: &ScalarFieldS2,
    f_odd: &ScalarFieldS2,
    circles: &[Point],
    m: usize,
    exec: Execution,
) -> Result<CancellationReport> {
    let odd_defect = f_odd.odd_defect();
    if odd_defect > 1e-10 {
        return Err(Error::NotOdd(odd_defect));
    }
    let sum = f_even.add(f_odd)?;
    let a = transform_circles(f_even, circles, m, exec)?;
    let b = transform_circles(&sum, circles, m, exec)?;
    let max_abs_diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let circles = circles
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&axis, (&even, &sum))| CircleValue { axis, even, sum })
        .collect();
    Ok(CancellationReport {
        circles,
        max_abs_diff,
        odd_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axes(n: usize) -> Vec<Point> {
        random_axes(7, n)
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(33);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
        assert_eq!(x[16], 0.0);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn harmonics_are_orthonormal() {
        let pairs = [((2, 1), (2, 1)), ((3, -2), (3, -2)), ((2, 0), (4, 0)), ((1, 1), (1, -1)), ((5, 3), (5, 3))];
        for ((l1, m1), (l2, m2)) in pairs {
            let f = ScalarFieldS2::from_fn(33, 64, |x| real_harmonic(l1, m1, x) * real_harmonic(l2, m2, x)).unwrap();
            let expect = if (l1, m1) == (l2, m2) { 1.0 } else { 0.0 };
            assert!((f.integral() - expect).abs() < 1e-12, "{l1} {m1} {l2} {m2}: {}", f.integral());
        }
    }

    #[test]
    fn constant_gives_circumference() {
        let f = ScalarFieldS2::from_fn(33, 64, |_| 1.0).unwrap();
        for a in axes(20) {
            assert!((great_circle_transform(&f, a, 128).unwrap() - TAU).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_harmonics_are_invisible() {
        let cs = axes(100);
        for (l, m) in [(1, 0), (1, 1), (1, -1), (3, 0), (3, 2), (3, -3)] {
            let f = harmonic_field(65, 128, &[(l, m, 1.0)]).unwrap();
            let worst = transform_circles(&f, &cs, 128, Execution::Sequential)
                .unwrap()
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(worst < 1e-8, "Y_{l}^{m}: {worst}");
        }
    }

    #[test]
    fn equatorial_zonal_matches_reference() {
        let f = harmonic_field(65, 128, &[(2, 0, 1.0)]).unwrap();
        let got = great_circle_transform(&f, [0.0, 0.0, 1.0], 256).unwrap();
        let reference = great_circle_integral(|x| real_harmonic(2, 0, x), [0.0, 0.0, 1.0], 1_000_000).unwrap();
        assert!(reference.abs() > 0.1);
        assert!((got - reference).abs() < 1e-6, "{got} {reference}");
    }

    #[test]
    fn parity_of_the_transform() {
        let f = harmonic_field(33, 64, &[(2, 1, 0.7), (3, -1, 0.4), (4, 2, -0.3), (1, 0, 1.0)]).unwrap();
        let g = f.antipodal();
        for a in axes(30) {
            let d = great_circle_transform(&f, a, 200).unwrap() - great_circle_transform(&g, a, 200).unwrap();
            assert!(d.abs() < 1e-10, "{d}");
        }
    }

    #[test]
    fn rotation_equivariance() {
        let (c, s) = (0.6f64, 0.8f64);
        let rot = |x: Point| [c * x[0] - s * x[2], x[1], s * x[0] + c * x[2]];
        let inv = |x: Point| [c * x[0] + s * x[2], x[1], -s * x[0] + c * x[2]];
        let terms = [(2, 1, 0.7), (2, 0, 0.5), (4, -2, 0.3)];
        let eval = |x: Point| terms.iter().map(|&(l, m, k)| k * real_harmonic(l, m, x)).sum::<f64>();
        let f = ScalarFieldS2::from_fn(2049, 4096, eval).unwrap();
        let g = ScalarFieldS2::from_fn(2049, 4096, |x| eval(inv(x))).unwrap();
        for a in axes(10) {
            let d = great_circle_transform(&f, a, 512).unwrap() - great_circle_transform(&g, rot(a), 512).unwrap();
            assert!(d.abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn invisible_odd_part() {
        let cs = axes(50);
        let even = harmonic_field(65, 128, &[(0, 0, 1.0), (2, 1, 0.5), (4, -3, 0.2)]).unwrap();
        let y10 = harmonic_field(65, 128, &[(1, 0, 1.0)]).unwrap();
        let r = antipodal_cancellation_check(&even, &y10, &cs, 128, Execution::Sequential).unwrap();
        assert!(r.max_abs_diff < 1e-8);
        let zero = ScalarFieldS2::zeros(65, 128).unwrap();
        let r = antipodal_cancellation_check(&even, &zero, &cs, 128, Execution::Sequential).unwrap();
        assert_eq!(r.max_abs_diff, 0.0);
        let even_only = harmonic_field(65, 128, &[(2, 0, 1.0)]).unwrap();
        assert!(matches!(
            antipodal_cancellation_check(&y10, &even_only, &cs, 128, Execution::Sequential),
            Err(Error::NotOdd(_))
        ));
    }

    #[test]
    fn small_grids_are_rejected() {
        assert!(ScalarFieldS2::zeros(31, 64).is_err());
        assert!(ScalarFieldS2::zeros(33, 63).is_err());
        let f = ScalarFieldS2::zeros(33, 64).unwrap();
        assert!(great_circle_transform(&f, [0.0, 0.0, 1.0], 100).is_err());
        assert!(great_circle_transform(&f, [0.0, 0.0, 0.0], 128).is_err());
    }
}
