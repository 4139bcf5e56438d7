use num_complex::Complex64;

use super::{Grid2D, PhasePoint, ScalarField2D};
use crate::{Error, Result};

/// Gaussian-enveloped plane wave centered at a phase point.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct WavepacketSpec {
    pub center: PhasePoint,
    /// Spatial standard deviation σ of the envelope.
    pub width: f64,
}

impl WavepacketSpec {
    pub fn new(center: PhasePoint, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("width {width} must be positive")));
        }
        Ok(Self { center, width })
    }

    /// `σ·k`; packets with a value below 4 are poorly localized in frequency.
    pub fn localization(&self) -> f64 {
        self.width * self.center.k
    }

    fn check(&self, grid: Grid2D) -> Result<()> {
        let half = 0.5 * grid.period();
        let edge = (-half * half / (2.0 * self.width * self.width)).exp();
        if edge > 1e-8 {
            return Err(Error::PacketLeaks(edge));
        }
        Ok(())
    }

    fn envelope(&self, grid: Grid2D, p: [f64; 2]) -> ([f64; 2], f64) {
        let d = grid.displacement(p, self.center.x);
        let r2 = d[0] * d[0] + d[1] * d[1];
        (d, (-r2 / (2.0 * self.width * self.width)).exp())
    }
}

/// `exp(-|x-x0|²/(2σ²)) cos(k ξ·(x-x0))`, normalized to unit L² norm.
pub fn make_wavepacket(spec: WavepacketSpec, grid: Grid2D) -> Result<ScalarField2D> {
    spec.check(grid)?;
    let c = spec.center;
    let f = ScalarField2D::from_fn(grid, |p| {
        let (d, env) = spec.envelope(grid, p);
        env * (c.k * (c.xi[0] * d[0] + c.xi[1] * d[1])).cos()
    });
    Ok(normalize(f))
}

/// Single-cone version with `exp(i k ξ·(x-x0))` in place of the cosine.
pub fn make_analytic_wavepacket(spec: WavepacketSpec, grid: Grid2D) -> Result<ScalarField2D> {
    spec.check(grid)?;
    let c = spec.center;
    let f = ScalarField2D::from_fn_complex(grid, |p| {
        let (d, env) = spec.envelope(grid, p);
        Complex64::from_polar(env, c.k * (c.xi[0] * d[0] + c.xi[1] * d[1]))
    });
    Ok(normalize(f))
}

/// Unnormalized Gaussian bump `exp(-|x-x0|²/(2σ²))`.
pub fn make_gaussian(grid: Grid2D, center: [f64; 2], sigma: f64) -> ScalarField2D {
    ScalarField2D::from_fn(grid, |p| {
        let d = grid.displacement(p, center);
        (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * sigma * sigma)).exp()
    })
}

fn normalize(f: ScalarField2D) -> ScalarField2D {
    let n = f.norm_l2();
    f.scale(1.0 / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(256, 16.0).unwrap()
    }

    #[test]
    fn unit_norm_and_center_value() {
        let spec = WavepacketSpec::new(PhasePoint::new([0.5, -1.0], [1.0, 1.0], 12.0).unwrap(), 0.7).unwrap();
        let f = make_wavepacket(spec, grid()).unwrap();
        assert!((f.norm_l2() - 1.0).abs() < 1e-10);
        // unnormalized peak is 1; the L² norm of the raw packet is sqrt(πσ²/2)(1+e^{-σ²k²})^{1/2}
        let s = spec.width;
        let raw = (std::f64::consts::PI * s * s / 2.0).sqrt();
        let at_center = f.sample_bilinear([0.5, -1.0]).re * raw;
        assert!((at_center - 1.0).abs() < 1e-9, "{at_center}");
    }

    #[test]
    fn translation_by_grid_steps() {
        let g = grid();
        let h = g.spacing();
        let c = PhasePoint::new([0.0, 0.0], [0.3, 1.0], 9.0).unwrap();
        let a = make_wavepacket(WavepacketSpec::new(c, 0.8).unwrap(), g).unwrap();
        let b = make_wavepacket(WavepacketSpec::new(c.translated([5.0 * h, -7.0 * h]), 0.8).unwrap(), g).unwrap();
        let diff = a.roll(-7, 5).sub(&b).max_abs();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn wide_packets_leak() {
        let c = PhasePoint::new([0.0, 0.0], [1.0, 0.0], 9.0).unwrap();
        let err = make_wavepacket(WavepacketSpec::new(c, 3.0).unwrap(), grid()).unwrap_err();
        assert!(matches!(err, Error::PacketLeaks(_)));
    }
}
