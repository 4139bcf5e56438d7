use crate::geodesic::{find_conjugate, norm_at, sing_fit_inputs, ConjugateOptions, Vector, Weights};
use crate::kernel_probe::{
    diagonal_symbol_check, fit_sqrt_singularity, kernel_slice, DiagonalOptions, SingularityFit, SlicePath, SliceOptions,
};
use crate::{Error, Execution, Result};

use super::geo::{lens_model, ModelSpec};
use super::{cell, Check, Report, Table};

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

#[derive(Clone, Debug)]
pub struct SqrtLawConfig {
    pub window: (f64, f64),
    /// Log-spaced slice offsets across the window.
    pub points: usize,
    pub exec: Execution,
}

impl Default for SqrtLawConfig {
    fn default() -> Self {
        Self {
            window: (0.01, 0.25),
            points: 14,
            exec: Execution::default(),
        }
    }
}

/// Kernel slice normal to `Σ(p)` at the first conjugate point along `theta`
/// (or along `path` when given), fitted on `window`. The coefficient is
/// checked against `√2·W_Σ/√(AD)` within `coeff_tol`.
#[allow(clippy::too_many_arguments)]
pub fn model_fit(
    spec: &ModelSpec,
    p: &Vector,
    theta: &Vector,
    path: Option<Vector>,
    window: (f64, f64),
    points: usize,
    coeff_tol: f64,
    exec: Execution,
) -> Result<(Report, SingularityFit)> {
    let m = spec.build();
    let model = m.as_ref();
    let th = theta / norm_at(model, p, theta);
    let opts = ConjugateOptions::default();
    let rec = find_conjugate(model, p, &th, 10.0, &opts)?
        .ok_or_else(|| Error::NoConjugate(format!("{} along {:?}", model.name(), theta.as_slice())))?;
    let inputs = sing_fit_inputs(model, p, &rec.v, &Weights::default(), &opts)?;
    let mut slice_path = SlicePath::log_spaced(window.0, window.1, points, false);
    slice_path.direction = path;
    let sopts = SliceOptions {
        exec,
        ..Default::default()
    };
    let slice = kernel_slice(model, p, &rec.v, &slice_path, &sopts)?;
    let fit = fit_sqrt_singularity(&slice.pairs(), window, Some(inputs.predicted))?;
    let mut table = Table::new(&["model", "s", "z", "kernel"]);
    for pt in &slice.points {
        table.push(vec![model.name(), cell(pt.s), cell(pt.z), cell(pt.kernel)]);
    }
    let name = model.name();
    let mut rep = Report::new(format!("kernel fit on {name}"), table);
    rep.check(Check::within(format!("{name}: fitted exponent"), fit.exponent, -0.5, 0.05));
    rep.check(Check::within(
        format!("{name}: coefficient over √2·W_Σ/√(AD)"),
        fit.ratio().unwrap_or(f64::NAN),
        1.0,
        coeff_tol,
    ));
    rep.note("exponent", fit.exponent);
    rep.note("coeff", fit.coeff);
    rep.note("predicted", inputs.predicted);
    rep.note("residual", fit.residual);
    rep.note("A", inputs.a);
    rep.note("D", inputs.d);
    rep.note("W_sigma", inputs.w_sigma);
    rep.note("bump_width", slice.bump_width);
    Ok((rep, fit))
}

/// Exponent and coefficient of the `1/√z′` law on circle2d and magnetic3d,
/// and the planar identity `B = AD` on the lens model.
pub fn sqrt_law(cfg: &SqrtLawConfig) -> Result<(Report, Vec<(String, SingularityFit)>)> {
    let cases = [
        (ModelSpec::Circle2d, v(&[1.0, 0.0]), 0.05),
        (ModelSpec::Magnetic3d(1.0), v(&[1.0, 0.0, 0.0]), 0.1),
    ];
    let mut rep = Report::new("square-root kernel singularity", Table::new(&["model", "s", "z", "kernel"]));
    let mut fits = Vec::new();
    for (spec, th, tol) in &cases {
        let (r, fit) = model_fit(spec, &spec.default_point(), th, None, cfg.window, cfg.points, *tol, cfg.exec)?;
        let name = spec.build().name();
        rep.table.rows.extend(r.table.rows.iter().cloned());
        for c in r.checks {
            rep.check(c);
        }
        for (k, val) in r.meta {
            rep.meta.insert(format!("{name}.{k}"), val);
        }
        fits.push((name, fit));
    }
    let lens = lens_model();
    let p = v(&[1.0, 0.0]);
    let opts = ConjugateOptions::default();
    let th = v(&[1.2f64.cos(), 1.2f64.sin()]);
    let th = &th / norm_at(&lens, &p, &th);
    let rec = find_conjugate(&lens, &p, &th, 8.0, &opts)?.ok_or_else(|| Error::NoConjugate("lens".into()))?;
    let inputs = sing_fit_inputs(&lens, &p, &rec.v, &Weights::default(), &opts)?;
    rep.check(Check::below("lens: |B - AD|/B", inputs.identity_error(), 1e-6));
    rep.note("window", format!("{}:{}", cfg.window.0, cfg.window.1));
    rep.note("points", cfg.points);
    Ok((rep, fits))
}

#[derive(Clone, Debug)]
pub struct DiagonalConfig {
    pub xi: [f64; 2],
    pub ks: Vec<f64>,
    /// Frequency whose relative error is checked.
    pub k_check: f64,
    pub exec: Execution,
}

impl Default for DiagonalConfig {
    fn default() -> Self {
        Self {
            xi: [1.0, 0.3],
            ks: vec![32.0, 64.0],
            k_check: 64.0,
            exec: Execution::default(),
        }
    }
}

/// Low-order response of the circular model against `4π/|ξ|`.
pub fn diagonal_symbol(cfg: &DiagonalConfig) -> Result<Report> {
    let m = ModelSpec::Circle2d.build();
    let opts = DiagonalOptions {
        exec: cfg.exec,
        ..Default::default()
    };
    let mut ks = cfg.ks.clone();
    if !ks.contains(&cfg.k_check) {
        ks.push(cfg.k_check);
    }
    let r = diagonal_symbol_check(m.as_ref(), &v(&[0.0, 0.0]), &[cfg.xi], &ks, &opts)?;
    let mut table = Table::new(&["xi0", "xi1", "k", "observed", "predicted", "rel_err"]);
    let mut at = f64::NAN;
    for s in &r.samples {
        table.push(vec![cell(s.xi[0]), cell(s.xi[1]), cell(s.k), cell(s.observed), cell(s.predicted), cell(s.rel_err)]);
        if s.k == cfg.k_check {
            at = s.rel_err;
        }
    }
    let mut rep = Report::new("diagonal symbol", table);
    rep.check(Check::below(format!("relative error against 4π/|ξ| at k = {}", cfg.k_check), at, 0.1));
    rep.note("sigma", opts.sigma);
    rep.note("t_cut", opts.t_cut);
    rep.note("theta_nodes", opts.theta_nodes);
    Ok(rep)
}
