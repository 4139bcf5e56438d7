use serde::Serialize;

use super::frozen::{annihilator_basis, conorm, gnorm, Frozen};
use super::model::{check_dims, exp_map, invariant_det, GeodesicModel, Matrix, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Fold,
    Blowdown1,
    BlowdownK,
    Unresolved,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Fold => "fold",
            Classification::Blowdown1 => "blowdown1",
            Classification::BlowdownK => "blowdownk",
            Classification::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateOptions {
    /// Samples of `det d exp` along the ray before refinement.
    pub scan: usize,
    /// Bracket width at which bisection stops.
    pub t_tol: f64,
    /// Relative singular-value threshold for the kernel.
    pub kernel_tol: f64,
    pub angle_tol: f64,
    pub ddet_tol: f64,
    /// Nearby conjugate vectors sampled for the tangency test.
    pub neighbours: usize,
    pub neighbour_angle: f64,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        Self {
            scan: 128,
            t_tol: 1e-12,
            kernel_tol: 1e-6,
            angle_tol: 1e-3,
            ddet_tol: 1e-8,
            neighbours: 8,
            neighbour_angle: 0.02,
        }
    }
}

/// A conjugate vector `v = t*·θ`.
#[derive(Clone, Debug)]
pub struct ConjugateRecord {
    pub p: Vector,
    pub v: Vector,
    pub t_star: f64,
    pub kernel_dim: usize,
    pub classification: Classification,
    /// Angle between `N_p(v)` and `T_vS(p)`, in `g(p)`.
    pub transversality: f64,
    pub ddet: f64,
    /// Unit kernel vector, oriented so that `det d exp` increases along it.
    pub normal: Vector,
    /// Coordinate gradient of `det d exp_p` at `v`.
    pub grad_det: Vector,
}

fn unit_in(g: &Matrix, v: &Vector) -> Vector {
    v / gnorm(g, v)
}

/// Kernel dimension and the right singular vector of the smallest singular
/// value.
pub(crate) fn kernel_of(dv: &Matrix, tol: f64) -> (usize, Vector) {
    let svd = dv.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let s = &svd.singular_values;
    let smax = s.max();
    let (imin, _) = s.argmin();
    let dim = s.iter().filter(|&&x| x < tol * smax).count();
    (dim, vt.row(imin).transpose())
}

/// Smallest conjugate time along `θ` in `(0, t_max]`.
pub fn find_conjugate(
    model: &dyn GeodesicModel,
    p: &Vector,
    theta: &Vector,
    t_max: f64,
    opts: &ConjugateOptions,
) -> Result<Option<ConjugateRecord>> {
    check_dims(model, &[p, theta])?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max must be positive and finite, got {t_max}")));
    }
    let g = model.metric(p);
    let theta = unit_in(&g, theta);
    let det_at = |t: f64| -> Result<f64> {
        let e = exp_map(model, p, &(&theta * t))?;
        Ok(invariant_det(model, p, &e))
    };
    let dt = t_max / opts.scan as f64;
    let mut prev: (f64, f64) = (0.0, 1.0);
    let mut pprev: Option<(f64, f64)> = None;
    let mut peak: f64 = 1.0;
    for i in 1..=opts.scan {
        let t = dt * i as f64;
        let d = det_at(t)?;
        if d == 0.0 || d.signum() != prev.1.signum() {
            let t_star = if d == 0.0 { t } else { bisect(&det_at, prev.0, t, prev.1, opts.t_tol)? };
            return record(model, p, &(&theta * t_star), t_star, opts, false).map(Some);
        }
        if let Some(pp) = pprev {
            // a sampled local minimum of |det| can hide a pair of sign
            // changes narrower than the scan step, or a tangential zero
            if prev.1.abs() < pp.1.abs() && prev.1.abs() < d.abs() {
                let s = prev.1.signum();
                let signed = |t: f64| det_at(t).map(|x| s * x);
                let t_min = golden_min(&signed, pp.0, t, opts.t_tol)?;
                let d_min = det_at(t_min)?;
                if d_min.signum() != s {
                    let t_star = bisect(&det_at, pp.0, t_min, pp.1, opts.t_tol)?;
                    return record(model, p, &(&theta * t_star), t_star, opts, false).map(Some);
                }
                if d_min.abs() < 1e-8 * peak {
                    return record(model, p, &(&theta * t_min), t_min, opts, true).map(Some);
                }
            }
        }
        peak = peak.max(d.abs());
        pprev = Some(prev);
        prev = (t, d);
    }
    Ok(None)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> Result<f64> {
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn golden_min(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol.max(1e-9) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

pub(crate) fn record(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    t_star: f64,
    opts: &ConjugateOptions,
    even: bool,
) -> Result<ConjugateRecord> {
    let mut rec = raw_record(model, p, v, t_star, opts)?;
    rec.classification = classify_caustic(model, &rec, opts)?;
    if even && rec.kernel_dim == 1 {
        rec.classification = Classification::Unresolved;
    }
    Ok(rec)
}

/// Fold, blowdown of type B₁ or B_k, or unresolved.
pub fn classify_caustic(
    model: &dyn GeodesicModel,
    rec: &ConjugateRecord,
    opts: &ConjugateOptions,
) -> Result<Classification> {
    if rec.kernel_dim >= 2 {
        return Ok(Classification::BlowdownK);
    }
    let g = model.metric(&rec.p);
    if conorm(&g, &rec.grad_det) < 1e-10 {
        return Ok(Classification::Unresolved);
    }
    if rec.transversality > opts.angle_tol && rec.ddet > opts.ddet_tol {
        return Ok(Classification::Fold);
    }
    // B₁ needs tangency at every nearby conjugate vector
    let t = gnorm(&g, &rec.v);
    let theta = &rec.v / t;
    let basis = annihilator_basis(&g, &(&g * &theta));
    let k = basis.ncols();
    for j in 0..opts.neighbours {
        let phase = std::f64::consts::TAU * j as f64 / opts.neighbours as f64;
        let mut dir = Vector::zeros(theta.len());
        for c in 0..k {
            let w = if k == 1 {
                if j % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else if c == 0 {
                phase.cos()
            } else {
                phase.sin()
            };
            dir += basis.column(c) * w;
        }
        let scale = opts.neighbour_angle * (1.0 + j as f64 / opts.neighbours as f64);
        let th = &theta + dir * scale;
        let inner = ConjugateOptions {
            neighbours: 0,
            ..*opts
        };
        let lo = 0.5 * t;
        let near = find_conjugate_in(model, &rec.p, &th, lo, 1.5 * t, &inner)?;
        match near {
            Some(r) if r.kernel_dim == 1 && r.transversality < opts.angle_tol => {}
            _ => return Ok(Classification::Unresolved),
        }
    }
    Ok(Classification::Blowdown1)
}

/// `find_conjugate` restricted to `(t_lo, t_hi]`, without the tangency
/// sampling.
pub(crate) fn find_conjugate_in(
    model: &dyn GeodesicModel,
    p: &Vector,
    theta: &Vector,
    t_lo: f64,
    t_hi: f64,
    opts: &ConjugateOptions,
) -> Result<Option<ConjugateRecord>> {
    let g = model.metric(p);
    let theta = unit_in(&g, theta);
    let det_at = |t: f64| -> Result<f64> {
        let e = exp_map(model, p, &(&theta * t))?;
        Ok(invariant_det(model, p, &e))
    };
    let steps = 32;
    let dt = (t_hi - t_lo) / steps as f64;
    let mut prev = (t_lo, det_at(t_lo)?);
    for i in 1..=steps {
        let t = t_lo + dt * i as f64;
        let d = det_at(t)?;
        if d.signum() != prev.1.signum() {
            let t_star = bisect(&det_at, prev.0, t, prev.1, opts.t_tol)?;
            return raw_record(model, p, &(&theta * t_star), t_star, opts).map(Some);
        }
        prev = (t, d);
    }
    Ok(None)
}

pub(crate) fn raw_record(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    t_star: f64,
    opts: &ConjugateOptions,
) -> Result<ConjugateRecord> {
    let frozen = Frozen::new(model, p, v)?;
    let e = frozen.exp(v)?;
    let g = model.metric(p);
    let (kernel_dim, n) = kernel_of(&e.dv, opts.kernel_tol);
    let grad = frozen.grad_det(v)?;
    let mut normal = unit_in(&g, &n);
    if grad.dot(&normal) < 0.0 {
        normal = -normal;
    }
    let slope = grad.dot(&normal);
    let a = conorm(&g, &grad);
    let transversality = if a > 0.0 { (slope / a).clamp(0.0, 1.0).asin() } else { 0.0 };
    Ok(ConjugateRecord {
        p: p.clone(),
        v: v.clone(),
        t_star,
        kernel_dim: kernel_dim.max(1),
        classification: Classification::Unresolved,
        transversality,
        ddet: slope,
        normal,
        grad_det: grad,
    })
}

/// Sampled tangent conjugate locus `S(p)` and conjugate locus `Σ(p)`.
#[derive(Clone, Debug)]
pub struct LocusSample {
    pub records: Vec<ConjugateRecord>,
    pub q: Vec<Vector>,
    pub w: Vec<Vector>,
    /// Angle between `w` and `d exp_p(T_vS(p))`, in `g(q)`.
    pub tangency: Vec<f64>,
    /// Set when some sampled point is not a fold.
    pub non_fold: bool,
}

/// Conjugate vectors along each direction of the patch; directions without
/// one are skipped.
pub fn conjugate_locus(
    model: &dyn GeodesicModel,
    p: &Vector,
    directions: &[Vector],
    t_max: f64,
    opts: &ConjugateOptions,
    exec: crate::Execution,
) -> Result<LocusSample> {
    let found = exec.map(directions.len(), |i| -> Result<Option<(ConjugateRecord, Vector, Vector, f64)>> {
        let Some(rec) = find_conjugate(model, p, &directions[i], t_max, opts)? else {
            return Ok(None);
        };
        let frozen = Frozen::new(model, p, &rec.v)?;
        let e = frozen.exp(&rec.v)?;
        let w = e.w();
        let gp = model.metric(p);
        let gq = model.metric(&e.q);
        let tangent = &e.dv * annihilator_basis(&gp, &rec.grad_det);
        let angle = angle_to_span(&gq, &w, &tangent);
        Ok(Some((rec, e.q, w, angle)))
    });
    let mut out = LocusSample {
        records: vec![],
        q: vec![],
        w: vec![],
        tangency: vec![],
        non_fold: false,
    };
    for item in found {
        if let Some((rec, q, w, angle)) = item? {
            out.non_fold |= rec.classification != Classification::Fold;
            out.records.push(rec);
            out.q.push(q);
            out.w.push(w);
            out.tangency.push(angle);
        }
    }
    Ok(out)
}

/// Angle in metric `g` between `x` and the span of the columns of `basis`.
pub(crate) fn angle_to_span(g: &Matrix, x: &Vector, basis: &Matrix) -> f64 {
    let gram = basis.transpose() * g * basis;
    let rhs = basis.transpose() * g * x;
    let coef = gram.lu().solve(&rhs).expect("independent tangent vectors");
    let proj = basis * coef;
    let perp = x - &proj;
    (gnorm(g, &perp) / gnorm(g, x)).clamp(0.0, 1.0).asin()
}
