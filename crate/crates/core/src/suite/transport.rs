use crate::cancellation::{build_pair, cancellation_ratio, scon_probe, PairConfig, RatioOptions, Side};
use crate::field::PhasePoint;
use crate::geodesic::models::{MagneticFlow, ProductWithLine};
use crate::geodesic::Vector;
use crate::{Execution, Result};

use super::{cell, Check, Report, Table};

#[derive(Clone, Debug)]
pub struct CancelConfig {
    pub pair: PairConfig,
    pub ratio: RatioOptions,
    pub ks: Vec<f64>,
    pub x0: [f64; 2],
    pub direction: [f64; 2],
    /// Frequency of the two-orders-of-magnitude and wrong-sign checks.
    pub control_k: f64,
    pub exec: Execution,
}

impl Default for CancelConfig {
    fn default() -> Self {
        Self {
            pair: PairConfig::default(),
            ratio: RatioOptions::default(),
            ks: vec![16.0, 32.0, 64.0, 128.0],
            x0: [-1.0, 0.0],
            direction: [1.0, 0.0],
            control_k: 32.0,
            exec: Execution::default(),
        }
    }
}

/// `rho_N` and `rho_R` over the sweep, with the wrong-sign control.
pub fn cancellation(cfg: &CancelConfig) -> Result<Report> {
    let center = PhasePoint::new(cfg.x0, cfg.direction, 1.0)?;
    let mut ks = cfg.ks.clone();
    if !ks.contains(&cfg.control_k) {
        ks.push(cfg.control_k);
    }
    let runs: Vec<Result<_>> = cfg.exec.map(ks.len(), |i| {
        let pair = build_pair(center, ks[i], Side::Plus, cfg.pair)?;
        let r = cancellation_ratio(&pair, cfg.ratio)?;
        let wrong = if ks[i] == cfg.control_k {
            Some(cancellation_ratio(&pair.wrong_sign(), cfg.ratio)?.rho_n)
        } else {
            None
        };
        Ok((r, wrong))
    });
    let mut table = Table::new(&["k", "rho_N", "rho_R"]);
    let mut sweep = Vec::new();
    let mut control = None;
    let mut wrong_sign = None;
    for (i, run) in runs.into_iter().enumerate() {
        let (r, wrong) = run?;
        if i < cfg.ks.len() {
            table.push(vec![cell(r.k), cell(r.rho_n), cell(r.rho_r)]);
            sweep.push(r.rho_n);
        }
        if r.k == cfg.control_k {
            control = Some(r.rho_n);
            wrong_sign = wrong;
        }
    }
    let worst_step = sweep.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut rep = Report::new("cancellation of singularities", table);
    rep.check(Check::below(format!("rho_N at k = {}", cfg.control_k), control.unwrap_or(f64::NAN), 1e-2));
    if sweep.len() > 1 {
        rep.check(Check::below("largest rho_N(k_next)/rho_N(k) over the sweep", worst_step, 1.0));
    }
    rep.check(Check::above(
        format!("wrong-sign rho_N at k = {}", cfg.control_k),
        wrong_sign.unwrap_or(f64::NAN),
        0.5,
    ));
    rep.note("n", cfg.pair.n);
    rep.note("period", cfg.pair.period);
    rep.note("width", cfg.pair.width);
    rep.note("terms", cfg.pair.terms);
    rep.note("probe_sigma", cfg.ratio.probe.sigma);
    rep.note("probe_band", cfg.ratio.probe.band);
    rep.note("plateau", format!("{}:{}", cfg.ratio.plateau.0, cfg.ratio.plateau.1));
    rep.note("x0", format!("{},{}", cfg.x0[0], cfg.x0[1]));
    rep.note("direction", format!("{},{}", cfg.direction[0], cfg.direction[1]));
    Ok(rep)
}

/// The three probe outcomes on the magnetic and product models.
pub fn scon() -> Result<Report> {
    let o = Vector::zeros(3);
    let v = |x: &[f64]| Vector::from_column_slice(x);
    let mag = MagneticFlow::magnetic3d(1.0);
    let prod = ProductWithLine {
        factor: MagneticFlow::circle2d(),
    };
    let cases: [(&str, &dyn crate::geodesic::GeodesicModel, Vector, bool); 3] = [
        ("magnetic3d:1, generic xi1", &mag, v(&[0.3, -0.5, 0.8]), true),
        ("product, xi1 with xi3 = 0", &prod, v(&[0.6, 0.8, 0.0]), false),
        ("product, xi1 with xi3 != 0", &prod, v(&[0.6, 0.5, 0.4]), true),
    ];
    let mut table = Table::new(&["case", "xi1_0", "xi1_1", "xi1_2", "holds", "witness_0", "witness_1", "witness_2"]);
    let mut rep = Report::new("strong conormal condition", Table::default());
    for (name, model, xi, expect) in cases {
        let r = scon_probe(model, &o, &xi, 8, 10.0)?;
        let w: Vec<String> = match &r.witness {
            Some(w) => w.iter().map(|x| cell(*x)).collect(),
            None => vec![String::new(); 3],
        };
        let mut row = vec![name.to_string()];
        row.extend(xi.iter().map(|x| cell(*x)));
        row.push(r.holds.to_string());
        row.extend(w);
        table.push(row);
        rep.check(Check::holds(name, r.holds == expect, if expect { "holds" } else { "fails" }));
    }
    rep.table = table;
    Ok(rep)
}
