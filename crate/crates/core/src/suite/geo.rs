use std::f64::consts::PI;

use crate::geodesic::models::{Base, Bump, ConformalMetric, ConformalSpeed, MagneticFlow, ProductWithLine, RoundSphere};
use crate::geodesic::{
    canonical_map, conjugate_locus, conormal_bundle, exp_map, find_conjugate, graph_test, invariant_det, norm_at,
    sing_fit_inputs, Classification, ConjugateOptions, ConjugateRecord, GeodesicModel, Vector, Weights,
};
use crate::{Error, Execution, Result};

use super::{cell, opt_cell, Check, Report, Table};

fn v(x: &[f64]) -> Vector {
    Vector::from_column_slice(x)
}

/// A named model with its usual base point.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Circle2d,
    Magnetic3d(f64),
    Sphere,
    Product,
    Lens,
    Conformal(ConformalSpeed),
}

impl ModelSpec {
    /// `circle2d`, `magnetic3d[:α]`, `sphere`, `product` or `lens`.
    /// Conformal models are read by the caller.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown model '{s}'"));
        Ok(match s {
            "circle2d" => Self::Circle2d,
            "sphere" => Self::Sphere,
            "product" => Self::Product,
            "lens" => Self::Lens,
            "magnetic3d" => Self::Magnetic3d(1.0),
            _ => {
                let a = s.strip_prefix("magnetic3d:").ok_or_else(bad)?;
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if !(alpha.is_finite() && alpha != 0.0) {
                    return Err(Error::InvalidArgument("field strength must be finite and nonzero".into()));
                }
                Self::Magnetic3d(alpha)
            }
        })
    }

    pub fn build(&self) -> Box<dyn GeodesicModel> {
        match self {
            Self::Circle2d => Box::new(MagneticFlow::circle2d()),
            Self::Magnetic3d(a) => Box::new(MagneticFlow::magnetic3d(*a)),
            Self::Sphere => Box::new(RoundSphere::default()),
            Self::Product => Box::new(ProductWithLine {
                factor: MagneticFlow::circle2d(),
            }),
            Self::Lens => Box::new(lens_model()),
            Self::Conformal(s) => Box::new(ConformalMetric::new(s.clone(), "conformal")),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Magnetic3d(_) | Self::Product => 3,
            _ => 2,
        }
    }

    pub fn default_point(&self) -> Vector {
        match self {
            Self::Sphere | Self::Lens | Self::Conformal(_) => v(&[1.0, 0.0]),
            _ => Vector::zeros(self.dim()),
        }
    }

    /// Closed-form first conjugate time along the unit direction `theta`.
    pub fn conjugate_time(&self, theta: &Vector) -> Option<f64> {
        match self {
            Self::Circle2d | Self::Sphere => Some(PI),
            Self::Magnetic3d(a) if theta[2].abs() < 1e-12 => Some(PI / a.abs()),
            _ => None,
        }
    }

    /// Whether conjugate points of this model are folds, when known.
    pub fn folds(&self) -> Option<bool> {
        match self {
            Self::Sphere => Some(false),
            Self::Conformal(_) => None,
            _ => Some(true),
        }
    }
}

/// Round sphere in the stereographic chart with a Gaussian speed bump. Its
/// conjugate points near `p = (1, 0)` are folds.
pub fn lens_model() -> ConformalMetric {
    ConformalMetric::new(
        ConformalSpeed {
            base: Base::Sphere,
            bumps: vec![Bump {
                center: [0.0, 0.8],
                amplitude: 0.3,
                width: 0.4,
            }],
        },
        "lens",
    )
}

fn lens_direction() -> Vector {
    v(&[1.2f64.cos(), 1.2f64.sin()])
}

/// Directions from a patch description:
///
/// * `ring:N` or `ring:N:elevation`: `N` directions at equal angles in the
///   first two coordinates, lifted by `elevation` radians in 3D;
/// * `fib:N`: the Fibonacci lattice on the unit sphere (3D only);
/// * `a,b[,c];…`: explicit directions.
///
/// Directions are not yet normalized in any metric.
pub fn patch_directions(dim: usize, spec: &str) -> Result<Vec<Vector>> {
    let bad = |m: &str| Error::InvalidArgument(format!("patch '{spec}': {m}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let count = |s: &str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(bad("count must be a positive integer")),
        }
    };
    let dirs = match parts[0] {
        "ring" if parts.len() == 2 || parts.len() == 3 => {
            let n = count(parts[1])?;
            let elev: f64 = match parts.get(2) {
                Some(e) => e.parse().map_err(|_| bad("elevation is not a number"))?,
                None => 0.0,
            };
            if dim == 2 && elev != 0.0 {
                return Err(bad("elevation needs a 3D model"));
            }
            (0..n)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / n as f64;
                    if dim == 2 {
                        v(&[a.cos(), a.sin()])
                    } else {
                        v(&[elev.cos() * a.cos(), elev.cos() * a.sin(), elev.sin()])
                    }
                })
                .collect()
        }
        "fib" if parts.len() == 2 => {
            if dim != 3 {
                return Err(bad("the Fibonacci lattice needs a 3D model"));
            }
            fibonacci(count(parts[1])?)
        }
        _ => {
            let mut out = Vec::new();
            for d in spec.split(';') {
                let xs: std::result::Result<Vec<f64>, _> = d.split(',').map(|x| x.trim().parse::<f64>()).collect();
                let xs = xs.map_err(|_| bad("expected ring:N, fib:N or a list of vectors"))?;
                if xs.len() != dim || xs.iter().all(|x| *x == 0.0) {
                    return Err(bad("each direction needs one nonzero entry per dimension"));
                }
                out.push(v(&xs));
            }
            out
        }
    };
    Ok(dirs)
}

fn fibonacci(n: usize) -> Vec<Vector> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            v(&[r * a.cos(), r * a.sin(), z])
        })
        .collect()
}

fn unit(model: &dyn GeodesicModel, p: &Vector, d: &Vector) -> Vector {
    d / norm_at(model, p, d)
}

/// One row per direction with a conjugate point: `v`, `t*`, `q`, class,
/// kernel dimension, and `A`, `D` at folds.
pub fn locus_table(
    model: &dyn GeodesicModel,
    p: &Vector,
    dirs: &[Vector],
    t_max: f64,
    exec: Execution,
) -> Result<(Table, Vec<ConjugateRecord>)> {
    let n = model.dim();
    let opts = ConjugateOptions::default();
    let units: Vec<Vector> = dirs.iter().map(|d| unit(model, p, d)).collect();
    let loc = conjugate_locus(model, p, &units, t_max, &opts, exec)?;
    let fits = exec.map(loc.records.len(), |i| {
        let r = &loc.records[i];
        if r.classification == Classification::Fold {
            sing_fit_inputs(model, p, &r.v, &Weights::default(), &opts).ok()
        } else {
            None
        }
    });
    let mut header: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    header.push("t_star".into());
    header.extend((0..n).map(|i| format!("q{i}")));
    header.extend(["class", "kernel_dim", "A", "D"].map(String::from));
    let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut table = Table::new(&h);
    for ((r, q), f) in loc.records.iter().zip(&loc.q).zip(&fits) {
        let mut row: Vec<String> = r.v.iter().map(|x| cell(*x)).collect();
        row.push(cell(r.t_star));
        row.extend(q.iter().map(|x| cell(*x)));
        row.push(r.classification.as_str().into());
        row.push(r.kernel_dim.to_string());
        row.push(opt_cell(f.as_ref().map(|f| f.a)));
        row.push(opt_cell(f.as_ref().map(|f| f.d)));
        table.push(row);
    }
    Ok((table, loc.records))
}

/// Locus of a single model over a patch, with the checks its closed forms
/// allow: every direction finds a conjugate point, `t*` where known, and
/// the expected fold type.
pub fn model_locus(spec: &ModelSpec, p: &Vector, dirs: &[Vector], t_max: f64, exec: Execution) -> Result<Report> {
    let model = spec.build();
    let (table, records) = locus_table(model.as_ref(), p, dirs, t_max, exec)?;
    let mut rep = Report::new(format!("conjugate locus of {}", model.name()), table);
    rep.check(Check::equals("directions with a conjugate point", records.len(), dirs.len()));
    let mut worst_t: Option<f64> = None;
    for r in &records {
        let theta = &r.v / r.t_star;
        if let Some(t) = spec.conjugate_time(&theta) {
            let e = (r.t_star - t).abs();
            worst_t = Some(worst_t.map_or(e, |w| w.max(e)));
        }
    }
    if let Some(w) = worst_t {
        rep.check(Check::below("max |t* - closed form|", w, 1e-8));
    }
    if let Some(fold) = spec.folds() {
        let folds = records.iter().filter(|r| r.classification == Classification::Fold).count();
        if fold {
            rep.check(Check::equals("fold conjugate vectors", folds, records.len()));
        } else {
            rep.check(Check::equals("fold conjugate vectors", folds, 0));
        }
    }
    rep.note("model", model.name());
    rep.note("t_max", t_max);
    Ok(rep)
}

fn first_conjugate(model: &dyn GeodesicModel, p: &Vector, theta: &Vector, t_max: f64) -> Result<ConjugateRecord> {
    let th = unit(model, p, theta);
    find_conjugate(model, p, &th, t_max, &ConjugateOptions::default())?
        .ok_or_else(|| Error::NoConjugate(format!("{} along {:?}", model.name(), theta.as_slice())))
}

/// Conjugate times on the closed-form models and `det d exp` on the sphere.
pub fn conjugate_detection(exec: Execution) -> Result<Report> {
    let mut table = Table::new(&["model", "t_star", "expected"]);
    let mut rep = Report::new("conjugate-point detection", Table::default());
    let mut cases: Vec<(ModelSpec, Vector)> = vec![(ModelSpec::Circle2d, v(&[0.6, 0.8]))];
    for a in [0.5, 1.0, 2.0] {
        cases.push((ModelSpec::Magnetic3d(a), v(&[1.0, 0.0, 0.0])));
    }
    cases.push((ModelSpec::Sphere, v(&[0.0, 1.0])));
    let found = exec.map(cases.len(), |i| {
        let (spec, th) = &cases[i];
        let m = spec.build();
        first_conjugate(m.as_ref(), &spec.default_point(), th, 8.0).map(|r| (m.name(), r))
    });
    for ((spec, th), f) in cases.iter().zip(found) {
        let (name, r) = f?;
        let expected = spec.conjugate_time(&unit(spec.build().as_ref(), &spec.default_point(), th)).expect("closed form");
        table.push(vec![name.clone(), cell(r.t_star), cell(expected)]);
        rep.check(Check::below(format!("{name}: |t* - {expected:.6}|"), (r.t_star - expected).abs(), 1e-8));
    }
    let sphere = RoundSphere::default();
    let p = v(&[1.0, 0.0]);
    let ts: Vec<f64> = (1..=30).map(|i| 0.1 * i as f64).chain([PI / 2.0]).collect();
    let mut worst: f64 = 0.0;
    for t in ts {
        let e = exp_map(&sphere, &p, &v(&[0.0, t]))?;
        worst = worst.max((invariant_det(&sphere, &p, &e) - t.sin() / t).abs());
    }
    rep.check(Check::below("sphere: max |det d exp - sin t/t| for t in (0, 3]", worst, 1e-8));
    rep.table = table;
    Ok(rep)
}

/// Fold type on the reference models and the rank drop of the product.
pub fn classification(exec: Execution) -> Result<Report> {
    let cases: Vec<(ModelSpec, Vector, bool)> = vec![
        (ModelSpec::Circle2d, v(&[1.0, 0.0]), true),
        (ModelSpec::Magnetic3d(1.0), v(&[0.0, 1.0, 0.0]), true),
        (ModelSpec::Sphere, v(&[0.3, 0.9]), false),
        (ModelSpec::Product, v(&[0.8, 0.0, 0.6]), true),
    ];
    let found = exec.map(cases.len(), |i| {
        let (spec, th, _) = &cases[i];
        let m = spec.build();
        first_conjugate(m.as_ref(), &spec.default_point(), th, 8.0)
    });
    let mut table = Table::new(&["model", "class", "kernel_dim", "transversality", "ddet"]);
    let mut rep = Report::new("caustic classification", Table::default());
    for ((spec, _, fold), r) in cases.iter().zip(found) {
        let r = r?;
        let name = spec.build().name();
        table.push(vec![
            name.clone(),
            r.classification.as_str().into(),
            r.kernel_dim.to_string(),
            cell(r.transversality),
            cell(r.ddet),
        ]);
        let is_fold = r.classification == Classification::Fold;
        let expect = if *fold { "fold" } else { "not fold" };
        rep.check(Check::holds(format!("{name}: {}", r.classification.as_str()), is_fold == *fold, expect));
        if *spec == ModelSpec::Product {
            let m = spec.build();
            let g = graph_test(m.as_ref(), &spec.default_point(), &r.v, 1e-4, &ConjugateOptions::default())?;
            rep.check(Check::equals(
                format!("{name}: graph rank deficit"),
                g.expected.saturating_sub(g.rank),
                1,
            ));
        }
    }
    rep.table = table;
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct LocusConfig {
    pub alpha: f64,
    pub samples: usize,
    pub t_max: f64,
    pub exec: Execution,
}

impl Default for LocusConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            samples: 1000,
            t_max: 10.0,
            exec: Execution::default(),
        }
    }
}

fn ellipsoid_residual(p: &Vector, q: &Vector, alpha: f64) -> f64 {
    let d = q - p;
    ((d[0] * d[0] + d[1] * d[1]) / 4.0 + d[2] * d[2] / (PI * PI) - 1.0 / (alpha * alpha)).abs()
}

/// Σ(p) of the magnetic model against the ellipsoid, and the tangency of
/// `w`, over Fibonacci directions.
pub fn locus_geometry(cfg: &LocusConfig) -> Result<Report> {
    let m = MagneticFlow::magnetic3d(cfg.alpha);
    let p = Vector::zeros(3);
    let dirs = fibonacci(cfg.samples);
    let loc = conjugate_locus(&m, &p, &dirs, cfg.t_max, &ConjugateOptions::default(), cfg.exec)?;
    let mut table = Table::new(&["theta0", "theta1", "theta2", "t_star", "q0", "q1", "q2", "ellipsoid_residual", "tangency"]);
    let mut worst_res: f64 = 0.0;
    let mut worst_tan: f64 = 0.0;
    let mut on = 0;
    for ((r, q), tan) in loc.records.iter().zip(&loc.q).zip(&loc.tangency) {
        let res = ellipsoid_residual(&p, q, cfg.alpha);
        worst_res = worst_res.max(res);
        worst_tan = worst_tan.max(*tan);
        if res < 1e-8 {
            on += 1;
        }
        let th = &r.v / r.t_star;
        let mut row: Vec<String> = th.iter().map(|x| cell(*x)).collect();
        row.push(cell(r.t_star));
        row.extend(q.iter().map(|x| cell(*x)));
        row.push(cell(res));
        row.push(cell(*tan));
        table.push(row);
    }
    let mut rep = Report::new("conjugate locus geometry", table);
    rep.check(Check::equals("sampled directions with a conjugate point", loc.records.len(), cfg.samples));
    rep.check(Check::below("max ellipsoid residual", worst_res, 1e-8));
    rep.check(Check::below("max angle between w and T Σ(p) (rad)", worst_tan, 1e-3));
    rep.note("alpha", cfg.alpha);
    rep.note("samples", cfg.samples);
    rep.note("on_ellipsoid", on);
    rep.note("non_fold", loc.non_fold);
    Ok(rep)
}

fn sine(a: &Vector, b: &Vector) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    (1.0 - c * c).max(0.0).sqrt()
}

/// `η = -ξ` and the direction of `ξ` on the magnetic model, and the Jacobi
/// characterization on the lens model.
pub fn conormal_geometry(samples: usize, exec: Execution) -> Result<Report> {
    let m = MagneticFlow::magnetic3d(1.0);
    let p = Vector::zeros(3);
    let opts = ConjugateOptions::default();
    let mut dirs = vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])];
    dirs.extend(fibonacci(samples).into_iter().filter(|d| d[2].abs() < 0.95));
    let found = exec.map(dirs.len(), |i| -> Result<_> {
        let rec = first_conjugate(&m, &p, &dirs[i], 10.0)?;
        let s = conormal_bundle(&m, &p, &rec.v, &opts)?;
        Ok((rec, s))
    });
    let mut table = Table::new(&["theta0", "theta1", "theta2", "xi0", "xi1", "xi2", "eta_plus_xi", "xi_sine"]);
    let mut worst_eta: f64 = 0.0;
    let mut worst_dir: f64 = 0.0;
    let mut worst_flat: f64 = 0.0;
    for f in found {
        let (rec, s) = f?;
        let d = &s.p - &s.q;
        let pred = v(&[d[0], d[1], 4.0 / (PI * PI) * d[2]]);
        let eta = (&s.eta + &s.xi).norm() / s.xi.norm();
        let dir = sine(&s.xi, &pred);
        worst_eta = worst_eta.max(eta);
        worst_dir = worst_dir.max(dir);
        let th = &rec.v / rec.t_star;
        if th[2].abs() < 1e-12 {
            worst_flat = worst_flat.max(dir);
        }
        let mut row: Vec<String> = th.iter().map(|x| cell(*x)).collect();
        row.extend(s.xi.iter().map(|x| cell(*x)));
        row.push(cell(eta));
        row.push(cell(dir));
        table.push(row);
    }
    let lens = lens_model();
    let lp = v(&[1.0, 0.0]);
    let rec = first_conjugate(&lens, &lp, &lens_direction(), 8.0)?;
    let jac = conormal_bundle(&lens, &lp, &rec.v, &opts)?
        .jacobi_collinearity
        .unwrap_or(f64::NAN);
    let mut rep = Report::new("conormal bundle", table);
    rep.check(Check::below("magnetic3d: max |η + ξ|/|ξ|", worst_eta, 1e-4));
    rep.check(Check::below("magnetic3d: max sine between ξ and (Δp1, Δp2, 4Δp3/π²)", worst_dir, 1e-4));
    rep.check(Check::below("lens: Jacobi collinearity", jac, 1e-4));
    rep.note("horizontal_xi_sine", cell(worst_flat));
    Ok(rep)
}

/// Full rank of the `(p, ξ)` projection and homogeneity of `(p, ξ) ↦ (q, η)`.
pub fn canonical_graph(exec: Execution) -> Result<Report> {
    let cases: Vec<(ModelSpec, Vector)> = vec![
        (ModelSpec::Circle2d, v(&[1.0, 0.0])),
        (ModelSpec::Magnetic3d(1.0), v(&[0.8, 0.0, 0.6])),
    ];
    let opts = ConjugateOptions::default();
    let found = exec.map(cases.len(), |i| -> Result<_> {
        let (spec, th) = &cases[i];
        let m = spec.build();
        let p = spec.default_point();
        let rec = first_conjugate(m.as_ref(), &p, th, 10.0)?;
        let g = graph_test(m.as_ref(), &p, &rec.v, 1e-4, &opts)?;
        let s = conormal_bundle(m.as_ref(), &p, &rec.v, &opts)?;
        let mut bump = Vector::zeros(p.len());
        for (i, b) in bump.iter_mut().enumerate() {
            *b = [0.01, -0.02, 0.015][i] * s.xi.norm();
        }
        let xi = &s.xi * 1.7 + bump;
        let one = canonical_map(m.as_ref(), &p, &rec.v, &xi, &opts)?;
        let scaled = canonical_map(m.as_ref(), &p, &rec.v, &(&xi * 3.0), &opts)?;
        let hom_eta = (&scaled.eta - &one.eta * 3.0).norm() / scaled.eta.norm();
        let hom_q = (&scaled.q - &one.q).norm();
        Ok((m.name(), g, hom_eta, hom_q))
    });
    let mut table = Table::new(&["model", "rank", "expected", "min_singular_value", "homogeneity_eta", "homogeneity_q"]);
    let mut rep = Report::new("canonical graph", Table::default());
    for f in found {
        let (name, g, he, hq) = f?;
        table.push(vec![
            name.clone(),
            g.rank.to_string(),
            g.expected.to_string(),
            opt_cell(g.singular_values.last().copied()),
            cell(he),
            cell(hq),
        ]);
        rep.check(Check::equals(format!("{name}: rank of the (p, ξ) projection"), g.rank, g.expected));
        rep.check(Check::below(format!("{name}: |η(3ξ) - 3η(ξ)|/|η(3ξ)|"), he, 1e-8));
        rep.check(Check::below(format!("{name}: |q(3ξ) - q(ξ)|"), hq, 1e-8));
    }
    rep.table = table;
    Ok(rep)
}

/// Graph test for one model at one direction.
pub fn model_graph(spec: &ModelSpec, p: &Vector, theta: &Vector, scale: f64) -> Result<Report> {
    let m = spec.build();
    let rec = first_conjugate(m.as_ref(), p, theta, 10.0)?;
    let g = graph_test(m.as_ref(), p, &rec.v, scale, &ConjugateOptions::default())?;
    let mut table = Table::new(&["index", "singular_value"]);
    for (i, s) in g.singular_values.iter().enumerate() {
        table.push(vec![i.to_string(), cell(*s)]);
    }
    let mut rep = Report::new(format!("graph test on {}", m.name()), table);
    let deficit = if *spec == ModelSpec::Product { 1 } else { 0 };
    rep.check(Check::equals("rank deficit", g.expected.saturating_sub(g.rank), deficit));
    rep.note("rank", g.rank);
    rep.note("is_graph", g.is_graph);
    rep.note("scale", scale);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_names_parse() {
        assert_eq!(ModelSpec::parse("magnetic3d:2").unwrap(), ModelSpec::Magnetic3d(2.0));
        assert_eq!(ModelSpec::parse("magnetic3d").unwrap(), ModelSpec::Magnetic3d(1.0));
        assert!(ModelSpec::parse("magnetic3d:0").is_err());
        assert!(ModelSpec::parse("torus").is_err());
    }

    #[test]
    fn patches() {
        assert_eq!(patch_directions(2, "ring:4").unwrap().len(), 4);
        let d = patch_directions(3, "ring:3:0.5").unwrap();
        assert!((d[1][2] - 0.5f64.sin()).abs() < 1e-15);
        let f = patch_directions(3, "fib:50").unwrap();
        assert!(f.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
        assert_eq!(patch_directions(2, "1,0;0,2").unwrap()[1], v(&[0.0, 2.0]));
        assert!(patch_directions(2, "fib:10").is_err());
        assert!(patch_directions(2, "1,0,0").is_err());
    }

    #[test]
    fn horizontal_magnetic_images_lie_on_the_ellipsoid() {
        let m = MagneticFlow::magnetic3d(1.0);
        let p = Vector::zeros(3);
        let r = first_conjugate(&m, &p, &v(&[0.6, 0.8, 0.0]), 10.0).unwrap();
        let e = exp_map(&m, &p, &r.v).unwrap();
        assert!(ellipsoid_residual(&p, &e.q, 1.0) < 1e-10);
    }
}
