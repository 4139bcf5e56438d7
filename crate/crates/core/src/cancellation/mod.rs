//! Packet pairs whose singularities cancel under the localized circular
//! transform.
//!
//! `f2` is a packet at `(x0, ±ξ0)`. Its partner `f1 = -2 A₀⁻¹ F f2` sits at the
//! image `x0 + 2s ξ0`, where `F` is whichever of `F±` moves each frequency
//! cone towards the image. Circles centered near `x0 + s ξ0` see both packets
//! and the two contributions cancel.

mod scon;

use num_complex::Complex64;

pub use scon::{scon_probe, SconReport};

use crate::circular::{self, f_symbol, BesselAsymptotics};
use crate::field::{
    fft2_with, ifft2_with, make_wavepacket, windowed_energy, Grid2D, Kind, PhasePoint, ProbeOptions,
    ScalarField2D, WavepacketSpec,
};
use crate::{Error, Execution, Result};

/// Direction of the image point relative to the packet direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    /// Image at `x0 + 2ξ0`.
    Plus,
    /// Image at `x0 - 2ξ0`.
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// Construction parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PairConfig {
    pub n: usize,
    pub period: f64,
    /// Envelope width of `f2`.
    pub width: f64,
    /// P/Q terms used for `A₀` and `F±`.
    pub terms: usize,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            period: 10.0,
            width: 0.25,
            terms: 2,
        }
    }
}

impl PairConfig {
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.period)
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PairMeta {
    pub center: PhasePoint,
    pub side: Side,
    pub image: [f64; 2],
    pub config: PairConfig,
}

#[derive(Clone, Debug)]
pub struct CancellationPair {
    pub f2: ScalarField2D,
    pub f1: ScalarField2D,
    pub k: f64,
    pub meta: PairMeta,
}

impl CancellationPair {
    /// Same pair with `f1` negated: a control where nothing cancels.
    pub fn wrong_sign(&self) -> Self {
        Self {
            f1: self.f1.scale(-1.0),
            ..self.clone()
        }
    }

    /// Circle-center point between the packet and its image.
    pub fn circle_center(&self) -> [f64; 2] {
        let c = self.meta.center;
        let s = self.meta.side.sign();
        [c.x[0] + s * c.xi[0], c.x[1] + s * c.xi[1]]
    }
}

/// Builds `f2` as a packet at `center` with frequency `k` and its partner.
pub fn build_pair(center: PhasePoint, k: f64, side: Side, cfg: PairConfig) -> Result<CancellationPair> {
    let grid = cfg.grid()?;
    if k >= grid.nyquist() / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "k = {k} not below half the Nyquist frequency {}",
            grid.nyquist()
        )));
    }
    let c = PhasePoint::new(center.x, center.xi, k)?;
    let f2 = make_wavepacket(WavepacketSpec::new(c, cfg.width)?, grid)?;
    build_pair_from(f2, c, side, cfg)
}

/// Partner construction for a caller-supplied `f2` localized at `center`.
pub fn build_pair_from(
    f2: ScalarField2D,
    center: PhasePoint,
    side: Side,
    cfg: PairConfig,
) -> Result<CancellationPair> {
    let grid = f2.grid();
    let s = side.sign();
    let image = [center.x[0] + 2.0 * s * center.xi[0], center.x[1] + 2.0 * s * center.xi[1]];
    // radius-2 interactions plus the packet must stay inside one period
    let safe = 0.5 * grid.period() - 2.0 - 6.0 * cfg.width;
    for p in [center.x, image] {
        if p[0].abs() > safe || p[1].abs() > safe {
            return Err(Error::ImageLeaks);
        }
    }
    let m = partner_symbol(center.xi, side, cfg.terms)?;
    let exec = Execution::default();
    let spec = fft2_with(&f2, exec);
    let vals = spec.values();
    let out = exec.map(grid.len(), |i| vals[i] * m(grid.freq_vec(i)));
    let mut f1 = ifft2_with(&ScalarField2D::with_values(grid, Kind::Complex, out), exec);
    if f2.is_real() {
        f1 = f1.into_real();
    }
    Ok(CancellationPair {
        f2,
        f1,
        k: center.k,
        meta: PairMeta {
            center,
            side,
            image,
            config: cfg,
        },
    })
}

/// Symbol of `-2 A₀⁻¹ F`, with `F` chosen per half-plane so each cone moves
/// towards the image.
fn partner_symbol(
    xi0: [f64; 2],
    side: Side,
    terms: usize,
) -> Result<impl Fn([f64; 2]) -> Complex64 + Sync + Send> {
    if terms < 1 {
        return Err(Error::InvalidArgument("at least one asymptotic term required".into()));
    }
    let b = BesselAsymptotics::new(terms);
    let ainv = circular::a0_inverse_multiplier(terms)?;
    let s = side.sign();
    Ok(move |xi: [f64; 2]| {
        let z = xi[0].hypot(xi[1]);
        // e^{-2i|D|} moves the cone ξ forward along ξ/|ξ|, e^{+2i|D|} backward
        let branch = |sign: f64| f_symbol(&b, z, sign) * Complex64::from_polar(1.0, 2.0 * sign * z);
        let proj = s * (xi[0] * xi0[0] + xi[1] * xi0[1]);
        let f = if proj > 0.0 {
            branch(-1.0)
        } else if proj < 0.0 {
            branch(1.0)
        } else {
            0.5 * (branch(1.0) + branch(-1.0))
        };
        -2.0 * ainv.eval(z).re * f
    })
}

/// Smooth plateau: 1 for `r <= r1`, 0 for `r >= r2`.
pub fn plateau(r: f64, r1: f64, r2: f64) -> f64 {
    if r <= r1 {
        return 1.0;
    }
    if r >= r2 {
        return 0.0;
    }
    let t = (r - r1) / (r2 - r1);
    let a = (-1.0 / (1.0 - t)).exp();
    let b = (-1.0 / t).exp();
    a / (a + b)
}

/// `R χ R f` with `χ` a plateau cutoff on circle centers around `c0`.
pub fn localized_normal(f: &ScalarField2D, c0: [f64; 2], r1: f64, r2: f64) -> ScalarField2D {
    let r = circular::transform_multiplier();
    let grid = f.grid();
    let rf = r.apply(f).multiply_by(|p| {
        let d = grid.displacement(p, c0);
        plateau(d[0].hypot(d[1]), r1, r2)
    });
    r.apply(&rf)
}

/// Probe and localization settings for [`cancellation_ratio`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct RatioOptions {
    pub probe: ProbeOptions,
    /// Inner and outer radius of the circle-center cutoff.
    pub plateau: (f64, f64),
}

impl Default for RatioOptions {
    fn default() -> Self {
        Self {
            probe: ProbeOptions {
                sigma: 0.1,
                band: 0.25,
                symmetric: true,
            },
            plateau: (0.7, 1.3),
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CancellationRatios {
    pub k: f64,
    pub rho_n: f64,
    pub rho_r: f64,
    /// `(probe position, ratio)` for each normal-operator probe.
    pub normal_probes: Vec<([f64; 2], f64)>,
}

pub fn cancellation_ratio(pair: &CancellationPair, opts: RatioOptions) -> Result<CancellationRatios> {
    let c0 = pair.circle_center();
    let sum = pair.f1.add(&pair.f2);
    let (r1, r2) = opts.plateau;
    let n_sum = localized_normal(&sum, c0, r1, r2);
    let n_ref = localized_normal(&pair.f2, c0, r1, r2);
    let center = pair.meta.center;
    let mut normal_probes = Vec::new();
    let mut rho_n: f64 = 0.0;
    for x in [center.x, pair.meta.image] {
        let probe = PhasePoint::new(x, center.xi, pair.k)?;
        let ratio = energy_ratio(&n_sum, &n_ref, probe, opts.probe)?;
        normal_probes.push((x, ratio));
        rho_n = rho_n.max(ratio);
    }
    let r = circular::transform_multiplier();
    let probe = PhasePoint::new(c0, center.xi, pair.k)?;
    let rho_r = energy_ratio(&r.apply(&sum), &r.apply(&pair.f2), probe, opts.probe)?;
    Ok(CancellationRatios {
        k: pair.k,
        rho_n,
        rho_r,
        normal_probes,
    })
}

/// Windowed-energy ratio of `a` against the reference `b` at one probe.
pub fn energy_ratio(a: &ScalarField2D, b: &ScalarField2D, probe: PhasePoint, opts: ProbeOptions) -> Result<f64> {
    let den = windowed_energy(b, probe, opts)?;
    if den < 1e-30 {
        return Err(Error::ReferenceVanished);
    }
    Ok(windowed_energy(a, probe, opts)? / den)
}

/// Ratio of the full normal operator on `f1 + f2` against `f2` alone, probed
/// at `x0 - 2sξ0`, where `f1` contributes nothing.
pub fn unaffected_ratio(pair: &CancellationPair, opts: ProbeOptions) -> Result<f64> {
    let c = pair.meta.center;
    let s = pair.meta.side.sign();
    let x = [c.x[0] - 2.0 * s * c.xi[0], c.x[1] - 2.0 * s * c.xi[1]];
    let nm = circular::normal_multiplier();
    let probe = PhasePoint::new(x, c.xi, pair.k)?;
    energy_ratio(&nm.apply(&pair.f1.add(&pair.f2)), &nm.apply(&pair.f2), probe, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::models::{MagneticFlow, ProductWithLine};
    use crate::geodesic::Vector;

    fn small() -> PairConfig {
        PairConfig {
            n: 512,
            ..PairConfig::default()
        }
    }

    fn center() -> PhasePoint {
        PhasePoint::new([-1.0, 0.0], [1.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn plateau_limits_and_monotonicity() {
        assert_eq!(plateau(0.5, 0.7, 1.3), 1.0);
        assert_eq!(plateau(1.4, 0.7, 1.3), 0.0);
        let mut prev = 1.0;
        for i in 1..60 {
            let v = plateau(0.7 + 0.01 * i as f64, 0.7, 1.3);
            assert!(v <= prev);
            prev = v;
        }
        assert!((plateau(1.0, 0.7, 1.3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn partner_cancels_and_improves_with_frequency() {
        let opts = RatioOptions::default();
        let mut prev = f64::INFINITY;
        for k in [16.0, 32.0] {
            let pair = build_pair(center(), k, Side::Plus, small()).unwrap();
            let r = cancellation_ratio(&pair, opts).unwrap();
            assert!(r.rho_n < prev, "k = {k}: {}", r.rho_n);
            prev = r.rho_n;
            if k == 32.0 {
                assert!(r.rho_n < 1e-2);
                let wrong = cancellation_ratio(&pair.wrong_sign(), opts).unwrap();
                assert!(wrong.rho_n > 0.5);
            }
        }
    }

    #[test]
    fn partner_sits_at_the_image() {
        let pair = build_pair(center(), 32.0, Side::Plus, small()).unwrap();
        assert!(pair.f1.is_real());
        let probe = ProbeOptions {
            sigma: 0.5,
            band: 0.25,
            symmetric: true,
        };
        let at = |x: [f64; 2]| windowed_energy(&pair.f1, PhasePoint::new(x, [1.0, 0.0], 32.0).unwrap(), probe).unwrap();
        assert!(at(pair.meta.image) > 100.0 * at([-3.0, 0.0]));
    }

    #[test]
    fn images_outside_the_period_are_rejected() {
        let c = PhasePoint::new([2.0, 0.0], [1.0, 0.0], 1.0).unwrap();
        assert!(matches!(build_pair(c, 16.0, Side::Plus, small()), Err(Error::ImageLeaks)));
    }

    #[test]
    fn frequency_above_half_nyquist_is_rejected() {
        assert!(build_pair(center(), 100.0, Side::Plus, small()).is_err());
    }

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn scon_on_magnetic_and_product_models() {
        let o = v(&[0.0, 0.0, 0.0]);
        let mag = scon_probe(&MagneticFlow::magnetic3d(1.0), &o, &v(&[0.3, -0.5, 0.8]), 8, 10.0).unwrap();
        assert!(mag.holds);
        let prod = ProductWithLine {
            factor: MagneticFlow::circle2d(),
        };
        let flat = scon_probe(&prod, &o, &v(&[0.6, 0.8, 0.0]), 8, 10.0).unwrap();
        assert!(!flat.holds);
        let lifted = scon_probe(&prod, &o, &v(&[0.6, 0.5, 0.4]), 8, 10.0).unwrap();
        assert!(lifted.holds);
    }

    #[test]
    fn scon_without_caustics_errors() {
        let m = crate::geodesic::models::Euclidean { dim: 2 };
        assert!(matches!(
            scon_probe(&m, &v(&[0.0, 0.0]), &v(&[1.0, 0.0]), 4, 10.0),
            Err(Error::NoCaustic)
        ));
    }
}
