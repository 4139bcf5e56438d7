use super::{fft2, PhasePoint, ScalarField2D};
use crate::{Error, Result};

/// Shape of a windowed-frequency probe.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ProbeOptions {
    /// Spatial width: the window's energy density has standard deviation `sigma`.
    pub sigma: f64,
    /// Relative half-width of the annulus and half-angle (radians) of the cone.
    pub band: f64,
    /// Accept both `xi` and `-xi`.
    pub symmetric: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            band: 0.25,
            symmetric: false,
        }
    }
}

/// L² mass of the windowed field inside the frequency cone of `probe`.
pub fn windowed_energy(f: &ScalarField2D, probe: PhasePoint, opts: ProbeOptions) -> Result<f64> {
    let grid = f.grid();
    if !(opts.band > 0.0 && opts.band < 1.0) {
        return Err(Error::InvalidArgument(format!("band {} must lie in (0, 1)", opts.band)));
    }
    if !(opts.sigma > 0.0) {
        return Err(Error::InvalidArgument("window width must be positive".into()));
    }
    if probe.k >= grid.nyquist() * (1.0 - opts.band) {
        return Err(Error::InvalidArgument(format!(
            "probe frequency {} too close to Nyquist {}",
            probe.k,
            grid.nyquist()
        )));
    }
    let s2 = 4.0 * opts.sigma * opts.sigma;
    let windowed = f.multiply_by(|p| {
        let d = grid.displacement(p, probe.x);
        (-(d[0] * d[0] + d[1] * d[1]) / s2).exp()
    });
    let spec = fft2(&windowed);
    let cos_band = opts.band.cos();
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, v) in spec.values().iter().enumerate() {
        let xi = grid.freq_vec(i);
        let r = xi[0].hypot(xi[1]);
        if (r - probe.k).abs() >= opts.band * probe.k {
            continue;
        }
        let c = (xi[0] * probe.xi[0] + xi[1] * probe.xi[1]) / r;
        let inside = if opts.symmetric { c.abs() > cos_band } else { c > cos_band };
        if inside {
            hits += 1;
            sum += v.norm_sqr();
        }
    }
    if hits == 0 {
        return Err(Error::BandUnresolved);
    }
    let h = grid.spacing();
    Ok(h * h * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_wavepacket, Grid2D, WavepacketSpec};

    fn setup() -> (Grid2D, PhasePoint, ScalarField2D) {
        let g = Grid2D::new(512, 16.0).unwrap();
        let p = PhasePoint::new([1.0, -0.5], [1.0, 0.0], 32.0).unwrap();
        let f = make_wavepacket(WavepacketSpec::new(p, 1.0).unwrap(), g).unwrap();
        (g, p, f)
    }

    #[test]
    fn matched_probe_captures_most_energy() {
        let (_, p, f) = setup();
        let opts = ProbeOptions { sigma: 1.0, band: 0.5, symmetric: true };
        let e = windowed_energy(&f, p, opts).unwrap();
        // window energy density std σ against packet density std σ/√2: 2/3
        assert!(e >= 0.5, "{e}");
        assert!((e - 2.0 / 3.0).abs() < 1e-3, "{e}");
        let one = windowed_energy(&f, p, ProbeOptions { symmetric: false, ..opts }).unwrap();
        assert!((one - e / 2.0).abs() < 1e-6);
    }

    #[test]
    fn orthogonal_direction_is_dark() {
        let (_, p, f) = setup();
        let q = PhasePoint::new(p.x, [0.0, 1.0], p.k).unwrap();
        let opts = ProbeOptions { sigma: 1.0, band: 0.5, symmetric: true };
        assert!(windowed_energy(&f, q, opts).unwrap() < 1e-6);
        let zero = ScalarField2D::zeros(f.grid());
        assert_eq!(windowed_energy(&zero, p, opts).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_in_amplitude() {
        let (_, p, f) = setup();
        let opts = ProbeOptions::default();
        let a = windowed_energy(&f, p, opts).unwrap();
        let b = windowed_energy(&f.scale(-3.0), p, opts).unwrap();
        assert!((b - 9.0 * a).abs() <= 1e-10 * b);
    }

    #[test]
    fn rejects_bad_bands() {
        let (g, p, f) = setup();
        assert!(windowed_energy(&f, p, ProbeOptions { band: 1.2, ..Default::default() }).is_err());
        let hi = PhasePoint::new(p.x, p.xi, g.nyquist()).unwrap();
        assert!(windowed_energy(&f, hi, ProbeOptions::default()).is_err());
        let tiny = PhasePoint::new(p.x, p.xi, 0.01).unwrap();
        assert!(matches!(
            windowed_energy(&f, tiny, ProbeOptions::default()),
            Err(Error::BandUnresolved)
        ));
    }
}
