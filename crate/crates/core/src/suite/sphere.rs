use std::f64::consts::PI;

use rand::{Rng, SeedableRng};

use crate::sphere::{antipodal_cancellation_check, harmonic_field, random_axes, real_harmonic, transform_circles};
use crate::{Error, Execution, Result};

use super::{cell, Check, Report, Table};

#[derive(Clone, Debug)]
pub struct SphereConfig {
    pub n_lat: usize,
    pub n_lon: usize,
    pub circles: usize,
    /// Nodes per great circle.
    pub m: usize,
    pub seed: u64,
    /// Harmonics `(l, m)` to transform; `None` means every odd one of degree
    /// 1 and 3.
    pub harmonics: Option<Vec<(usize, i64)>>,
    pub exec: Execution,
}

impl Default for SphereConfig {
    fn default() -> Self {
        Self {
            n_lat: 64,
            n_lon: 128,
            circles: 100,
            m: 256,
            seed: 0,
            harmonics: None,
            exec: Execution::default(),
        }
    }
}

fn legendre_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    // P_l(0) = (-1)^{l/2} (l-1)!! / l!!
    let mut p = 1.0;
    for j in (2..=l).step_by(2) {
        p *= -((j - 1) as f64) / j as f64;
    }
    p
}

fn random_field(rng: &mut impl Rng, cfg: &SphereConfig, degrees: &[usize]) -> Result<crate::sphere::ScalarFieldS2> {
    let mut terms = Vec::new();
    for &l in degrees {
        for m in -(l as i64)..=(l as i64) {
            terms.push((l, m, rng.gen_range(-1.0..1.0)));
        }
    }
    harmonic_field(cfg.n_lat, cfg.n_lon, &terms)
}

/// Great-circle transforms of odd harmonics, and the even/odd cancellation
/// over random circles.
pub fn sphere_kernel(cfg: &SphereConfig) -> Result<Report> {
    let harmonics = match &cfg.harmonics {
        Some(h) => h.clone(),
        None => [1usize, 3]
            .iter()
            .flat_map(|&l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
            .collect(),
    };
    if let Some(&(l, m)) = harmonics.iter().find(|(l, m)| m.unsigned_abs() as usize > *l) {
        return Err(Error::InvalidArgument(format!("harmonic order {m} exceeds degree {l}")));
    }
    let axes = random_axes(cfg.seed, cfg.circles);
    let mut table = Table::new(&["l", "m", "axis0", "axis1", "axis2", "transform", "funk_hecke"]);
    let mut rep = Report::new("great-circle transform on S²", Table::default());
    let mut worst_odd: Option<f64> = None;
    let mut worst_even: Option<f64> = None;
    for &(l, m) in &harmonics {
        let f = harmonic_field(cfg.n_lat, cfg.n_lon, &[(l, m, 1.0)])?;
        let values = transform_circles(&f, &axes, cfg.m, cfg.exec)?;
        let scale = 2.0 * PI * legendre_at_zero(l);
        for (a, t) in axes.iter().zip(&values) {
            let exact = scale * real_harmonic(l, m, *a);
            let err = (t - exact).abs();
            let slot = if l % 2 == 1 { &mut worst_odd } else { &mut worst_even };
            *slot = Some(slot.map_or(err, |w: f64| w.max(err)));
            table.push(vec![l.to_string(), m.to_string(), cell(a[0]), cell(a[1]), cell(a[2]), cell(*t), cell(exact)]);
        }
    }
    if let Some(w) = worst_odd {
        rep.check(Check::below(format!("odd harmonics: max |transform| over {} circles", cfg.circles), w, 1e-8));
    }
    if let Some(w) = worst_even {
        rep.note("even_funk_hecke_error", cell(w));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let f_even = random_field(&mut rng, cfg, &[0, 2, 4])?;
    let f_odd = random_field(&mut rng, cfg, &[1, 3, 5])?;
    let c = antipodal_cancellation_check(&f_even, &f_odd, &axes, cfg.m, cfg.exec)?;
    rep.check(Check::below("max |T(f_even + f_odd) - T(f_even)|", c.max_abs_diff, 1e-7));
    rep.note("odd_defect", cell(c.odd_defect));
    rep.note("n_lat", cfg.n_lat);
    rep.note("n_lon", cfg.n_lon);
    rep.note("m", cfg.m);
    rep.note("circles", cfg.circles);
    rep.note("seed", cfg.seed);
    rep.table = table;
    Ok(rep)
}
