use crate::circular::{
    circular_transform_quadrature_with, decompose_with, f_multiplier, normal_kernel_analytic, normal_multiplier,
    probe_normal_kernel, transform_multiplier, Interpolation,
};
use crate::field::{
    make_analytic_wavepacket, make_gaussian, make_wavepacket, windowed_energy, Grid2D, PhasePoint, ProbeOptions,
    WavepacketSpec,
};
use crate::{Execution, Result};

use super::{cell, log_slope, Check, Report, Table};

#[derive(Clone, Debug)]
pub struct ApplyConfig {
    pub n: usize,
    pub period: f64,
    pub m: usize,
    pub sigma: f64,
    pub interp: Interpolation,
    pub exec: Execution,
}

impl Default for ApplyConfig {
    fn default() -> Self {
        Self {
            n: 512,
            period: 16.0,
            m: 1024,
            sigma: 1.0,
            interp: Interpolation::Cubic,
            exec: Execution::default(),
        }
    }
}

/// Quadrature against multiplier on a Gaussian; the table is the centre row.
pub fn apply_equivalence(cfg: &ApplyConfig) -> Result<Report> {
    let grid = Grid2D::new(cfg.n, cfg.period)?;
    let f = make_gaussian(grid, [0.0, 0.0], cfg.sigma);
    let quad = circular_transform_quadrature_with(&f, cfg.m, cfg.interp, cfg.exec)?;
    let mult = transform_multiplier().apply_with(&f, cfg.exec);
    let rel = quad.sub(&mult).norm_l2() / mult.norm_l2();
    let mut table = Table::new(&["x", "y", "quadrature", "multiplier"]);
    let row = cfg.n / 2;
    for c in 0..cfg.n {
        let p = grid.point(row * cfg.n + c);
        table.push(vec![cell(p[0]), cell(p[1]), cell(quad.get(row, c).re), cell(mult.get(row, c).re)]);
    }
    let mut r = Report::new("circular transform: quadrature against multiplier", table);
    r.check(Check::below("relative L2 discrepancy", rel, 1e-5));
    r.note("n", cfg.n);
    r.note("period", cfg.period);
    r.note("m", cfg.m);
    r.note("sigma", cfg.sigma);
    r.note("interpolation", format!("{:?}", cfg.interp).to_lowercase());
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct KernelConfig {
    pub n: usize,
    pub period: f64,
    pub width: f64,
    pub samples: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Distances `2 - r` used to extrapolate `√(2-r)·K` to the edge.
    pub edge: Vec<f64>,
    pub exec: Execution,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            n: 2048,
            period: 8.0,
            width: 0.012,
            samples: 400,
            r_min: 0.2,
            r_max: 1.8,
            edge: vec![0.05, 0.075, 0.1, 0.125, 0.15],
            exec: Execution::default(),
        }
    }
}

/// Bump-probed kernel of `R*R` against `4/(r√(4-r²))`.
pub fn normal_kernel(cfg: &KernelConfig) -> Result<Report> {
    let grid = Grid2D::new(cfg.n, cfg.period)?;
    let count = cfg.samples.max(2);
    let mut radii: Vec<f64> = (0..count)
        .map(|i| cfg.r_min + (cfg.r_max - cfg.r_min) * i as f64 / (count - 1) as f64)
        .collect();
    radii.extend(cfg.edge.iter().map(|z| 2.0 - z));
    let probes = probe_normal_kernel(grid, cfg.width, &radii, cfg.exec)?;
    let mut table = Table::new(&["r", "analytic", "numeric", "rel_err"]);
    let mut worst: f64 = 0.0;
    let mut edge = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        let exact = normal_kernel_analytic(p.r)?;
        let rel = (p.extrapolated - exact).abs() / exact;
        table.push(vec![cell(p.r), cell(exact), cell(p.extrapolated), cell(rel)]);
        if i < count {
            worst = worst.max(rel);
        } else {
            edge.push((2.0 - p.r, (2.0 - p.r).sqrt() * p.extrapolated));
        }
    }
    let limit = linear_intercept(&edge);
    let mut r = Report::new("normal-operator kernel", table);
    r.check(Check::below(
        format!("max relative error on r in [{}, {}]", cfg.r_min, cfg.r_max),
        worst,
        0.02,
    ));
    r.check(Check::within("sqrt(2-r)·K extrapolated to r = 2", limit, 1.0, 0.05));
    r.note("n", cfg.n);
    r.note("period", cfg.period);
    r.note("bump_width", cfg.width);
    r.note("edge_limit", limit);
    Ok(r)
}

/// Value at 0 of the least-squares line through `points`.
fn linear_intercept(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    my - num / den * mx
}

#[derive(Clone, Debug)]
pub struct DecomposeConfig {
    pub n: usize,
    pub period: f64,
    pub terms: usize,
    pub width: f64,
    pub ks: Vec<f64>,
    pub transport_k: f64,
    pub direction: [f64; 2],
    pub exec: Execution,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            period: 10.0,
            terms: 2,
            width: 0.25,
            ks: vec![16.0, 32.0, 64.0, 128.0],
            transport_k: 32.0,
            direction: [0.6, 0.8],
            exec: Execution::default(),
        }
    }
}

/// Transport by `F±`, their adjointness and the decay of the residual.
pub fn decomposition(cfg: &DecomposeConfig) -> Result<Report> {
    let grid = Grid2D::new(cfg.n, cfg.period)?;
    let fp = f_multiplier(cfg.terms, 1)?;
    let fm = f_multiplier(cfg.terms, -1)?;
    let c = PhasePoint::new([0.0, 0.0], cfg.direction, cfg.transport_k)?;
    let d = [2.0 * c.xi[0], 2.0 * c.xi[1]];
    let packet = make_analytic_wavepacket(WavepacketSpec::new(c, cfg.width)?, grid)?;
    let po = ProbeOptions {
        sigma: cfg.width,
        band: 0.25,
        symmetric: false,
    };
    let back = c.translated([-d[0], -d[1]]);
    let fwd = c.translated(d);
    let plus = fp.apply_with(&packet, cfg.exec);
    let minus = fm.apply_with(&packet, cfg.exec);
    let plus_ratio = windowed_energy(&plus, back, po)? / windowed_energy(&plus, fwd, po)?.max(1e-300);
    let minus_ratio = windowed_energy(&minus, fwd, po)? / windowed_energy(&minus, back, po)?.max(1e-300);

    let other = PhasePoint::new([0.5, -0.3], [-0.2, 1.0], 0.6 * cfg.transport_k)?;
    let f = packet.add(&make_analytic_wavepacket(WavepacketSpec::new(other, 0.4)?, grid)?.scale(0.5));
    let g = make_analytic_wavepacket(WavepacketSpec::new(other, 0.4)?, grid)?
        .add(&make_wavepacket(WavepacketSpec::new(c, 0.3)?, grid)?);
    let fpf = fp.apply_with(&f, cfg.exec);
    let lhs = fpf.inner(&g);
    let rhs = f.inner(&fm.apply_with(&g, cfg.exec));
    let adjoint = (lhs - rhs).norm() / (fpf.norm_l2() * g.norm_l2());

    let nm = normal_multiplier();
    let mut table = Table::new(&["k", "residual_rel"]);
    let mut pts = Vec::new();
    for &k in &cfg.ks {
        let pk = PhasePoint::new([0.0, 0.0], cfg.direction, k)?;
        let f = make_wavepacket(WavepacketSpec::new(pk, cfg.width)?, grid)?;
        let dec = decompose_with(&f, cfg.terms, cfg.exec)?;
        let full = nm.apply_with(&f, cfg.exec);
        let rel = dec.residual.norm_l2() / full.norm_l2();
        table.push(vec![cell(k), cell(rel)]);
        pts.push((k, rel));
    }
    let slope = log_slope(&pts);
    let mut r = Report::new("decomposition into A0 + F+ + F-", table);
    r.check(Check::above("F+ energy at x0 - 2ξ̂ over x0 + 2ξ̂", plus_ratio, 100.0));
    r.check(Check::above("F- energy at x0 + 2ξ̂ over x0 - 2ξ̂", minus_ratio, 100.0));
    r.check(Check::below("<F+ f, g> - <f, F- g> (relative)", adjoint, 1e-10));
    r.check(Check::at_most("residual decay slope in k", slope, -2.2));
    r.note("n", cfg.n);
    r.note("period", cfg.period);
    r.note("terms", cfg.terms);
    r.note("slope", slope);
    Ok(r)
}
