//! Periodic planar grids and the fields that live on them.

mod fft;
mod io;
mod packet;
mod probe;

pub use fft::{fft2, fft2_with, ifft2, ifft2_with};
pub use io::{read_csf2, write_csf2, write_csv};
pub use packet::{make_analytic_wavepacket, make_gaussian, make_wavepacket, WavepacketSpec};
pub use probe::{windowed_energy, ProbeOptions};

use num_complex::Complex64;

use crate::{Error, Result};

/// Square periodic grid of `n × n` samples on a torus of side `l`.
///
/// Sample `(row, col)` sits at `(x, y) = (coord(col), coord(row))`, with the
/// origin at index `n / 2` so that the period is `[-l/2, l/2)` per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 64")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("period L = {l} must be positive")));
        }
        Ok(Self { n, l })
    }

    /// Grids smaller than 64 are only needed by tests of the FFT itself.
    #[cfg(test)]
    pub(crate) fn new_unchecked(n: usize, l: f64) -> Self {
        Self { n, l }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.l
    }

    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(idx % self.n), self.coord(idx / self.n)]
    }

    /// Angular frequency of FFT bin `i`.
    pub fn freq(&self, i: usize) -> f64 {
        let n = self.n as isize;
        let i = i as isize;
        let k = if i < n / 2 { i } else { i - n };
        2.0 * std::f64::consts::PI / self.l * k as f64
    }

    /// Frequency vector `(ξ1, ξ2)` of the flat bin index `idx`.
    pub fn freq_vec(&self, idx: usize) -> [f64; 2] {
        [self.freq(idx % self.n), self.freq(idx / self.n)]
    }

    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.n as f64 / self.l
    }

    /// Shortest periodic representative of `a - b`.
    pub fn wrap(&self, d: f64) -> f64 {
        d - self.l * (d / self.l).round()
    }

    pub fn displacement(&self, x: [f64; 2], x0: [f64; 2]) -> [f64; 2] {
        [self.wrap(x[0] - x0[0]), self.wrap(x[1] - x0[1])]
    }
}

/// Whether a field is known to be real. Real fields have exactly zero
/// imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Real,
    Complex,
}

/// Sampled field on a [`Grid2D`], row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    kind: Kind,
    values: Vec<Complex64>,
}

impl ScalarField2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            kind: Kind::Real,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_real(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        Self::check_len(grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self {
            grid,
            kind: Kind::Real,
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        })
    }

    pub fn from_complex(grid: Grid2D, values: Vec<Complex64>) -> Result<Self> {
        Self::check_len(grid, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self {
            grid,
            kind: Kind::Complex,
            values,
        })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| Complex64::new(f(grid.point(i)), 0.0))
            .collect();
        Self {
            grid,
            kind: Kind::Real,
            values,
        }
    }

    pub fn from_fn_complex(grid: Grid2D, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid,
            kind: Kind::Complex,
            values,
        }
    }

    fn check_len(grid: Grid2D, len: usize) -> Result<()> {
        if len != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {len}",
                grid.len()
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == Kind::Real
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.grid.n + col]
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Drops the imaginary part and marks the field real.
    pub fn into_real(mut self) -> Self {
        self.values.iter_mut().for_each(|v| v.im = 0.0);
        self.kind = Kind::Real;
        self
    }

    pub(crate) fn with_values(grid: Grid2D, kind: Kind, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        let mut out = Self { grid, kind, values };
        if kind == Kind::Real {
            out.values.iter_mut().for_each(|v| v.im = 0.0);
        }
        out
    }

    /// Continuum L² norm, `sqrt(h² Σ |f|²)`.
    pub fn norm_l2(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        let h = self.grid.spacing();
        h * h * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Continuum inner product `∫ f conj(g)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let h = self.grid.spacing();
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * h * h
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            kind: self.kind,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let kind = if self.is_real() && other.is_real() {
            Kind::Real
        } else {
            Kind::Complex
        };
        Self {
            grid: self.grid,
            kind,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pointwise product with a real function of position.
    pub fn multiply_by(&self, w: impl Fn([f64; 2]) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * w(self.grid.point(i)))
            .collect();
        Self {
            grid: self.grid,
            kind: self.kind,
            values,
        }
    }

    /// Cyclic shift by whole samples: `out(row, col) = f(row - dr, col - dc)`.
    pub fn roll(&self, dr: isize, dc: isize) -> Self {
        let n = self.grid.n as isize;
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for r in 0..n {
            for c in 0..n {
                let sr = (r - dr).rem_euclid(n);
                let sc = (c - dc).rem_euclid(n);
                values[(r * n + c) as usize] = self.values[(sr * n + sc) as usize];
            }
        }
        Self {
            grid: self.grid,
            kind: self.kind,
            values,
        }
    }

    /// Bilinear interpolation at an arbitrary (periodically wrapped) point.
    pub fn sample_bilinear(&self, p: [f64; 2]) -> Complex64 {
        let (i0, j0, tx, ty) = self.cell(p);
        let n = self.grid.n;
        let i1 = (i0 + 1) % n;
        let j1 = (j0 + 1) % n;
        let v = &self.values;
        (v[j0 * n + i0] * (1.0 - tx) + v[j0 * n + i1] * tx) * (1.0 - ty)
            + (v[j1 * n + i0] * (1.0 - tx) + v[j1 * n + i1] * tx) * ty
    }

    /// Four-point Lagrange (bicubic) interpolation.
    pub fn sample_cubic(&self, p: [f64; 2]) -> Complex64 {
        let (i0, j0, tx, ty) = self.cell(p);
        let n = self.grid.n;
        let wx = lagrange4(tx);
        let wy = lagrange4(ty);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, wya) in wy.iter().enumerate() {
            let j = (j0 + n + a - 1) % n;
            let mut row = Complex64::new(0.0, 0.0);
            for (b, wxb) in wx.iter().enumerate() {
                let i = (i0 + n + b - 1) % n;
                row += self.values[j * n + i] * *wxb;
            }
            acc += row * *wya;
        }
        acc
    }

    fn cell(&self, p: [f64; 2]) -> (usize, usize, f64, f64) {
        let n = self.grid.n;
        let h = self.grid.spacing();
        let half = (n / 2) as f64;
        let fx = (p[0] / h + half).rem_euclid(n as f64);
        let fy = (p[1] / h + half).rem_euclid(n as f64);
        let i0 = (fx.floor() as usize) % n;
        let j0 = (fy.floor() as usize) % n;
        (i0, j0, fx - fx.floor(), fy - fy.floor())
    }
}

fn lagrange4(t: f64) -> [f64; 4] {
    // nodes at -1, 0, 1, 2
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// A point of phase space: position, unit frequency direction and frequency
/// magnitude.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PhasePoint {
    pub x: [f64; 2],
    pub xi: [f64; 2],
    pub k: f64,
}

impl PhasePoint {
    /// Normalizes `xi`; fails on a zero direction or nonpositive `k`.
    pub fn new(x: [f64; 2], xi: [f64; 2], k: f64) -> Result<Self> {
        let norm = xi[0].hypot(xi[1]);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("frequency direction must be nonzero".into()));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k = {k} must be positive")));
        }
        Ok(Self {
            x,
            xi: [xi[0] / norm, xi[1] / norm],
            k,
        })
    }

    pub fn translated(&self, d: [f64; 2]) -> Self {
        Self {
            x: [self.x[0] + d[0], self.x[1] + d[1]],
            ..*self
        }
    }

    pub fn flipped(&self) -> Self {
        Self {
            xi: [-self.xi[0], -self.xi[1]],
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid2D::new(100, 1.0).is_err());
        assert!(Grid2D::new(32, 1.0).is_err());
        assert!(Grid2D::new(64, 0.0).is_err());
        let g = Grid2D::new(64, 16.0).unwrap();
        assert_eq!(g.coord(32), 0.0);
        assert_eq!(g.freq(63), -2.0 * std::f64::consts::PI / 16.0);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_linear_data() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let f = ScalarField2D::from_fn(g, |p| 0.3 * p[0] - 0.2 * p[1] + 1.0);
        let v = f.sample_bilinear([0.4321, -1.234]).re;
        assert!((v - (0.3 * 0.4321 + 0.2 * 1.234 + 1.0)).abs() < 1e-12);
        let c = f.sample_cubic([0.4321, -1.234]).re;
        assert!((c - v).abs() < 1e-12);
        assert_eq!(f.sample_bilinear(g.point(70)), f.values()[70]);
    }

    #[test]
    fn roll_matches_translation() {
        let g = Grid2D::new(64, 8.0).unwrap();
        let f = ScalarField2D::from_fn(g, |p| (-4.0 * (p[0] * p[0] + p[1] * p[1])).exp());
        let h = g.spacing();
        let shifted = ScalarField2D::from_fn(g, |p| {
            let (x, y) = (p[0] - 3.0 * h, p[1] + 2.0 * h);
            (-4.0 * (x * x + y * y)).exp()
        });
        let diff = f.roll(-2, 3).sub(&shifted).max_abs();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn phase_point_normalizes() {
        let p = PhasePoint::new([0.0, 0.0], [3.0, 4.0], 2.0).unwrap();
        assert!((p.xi[0] - 0.6).abs() < 1e-15);
        assert!(PhasePoint::new([0.0, 0.0], [0.0, 0.0], 2.0).is_err());
        assert!(PhasePoint::new([0.0, 0.0], [1.0, 0.0], -1.0).is_err());
    }
}
