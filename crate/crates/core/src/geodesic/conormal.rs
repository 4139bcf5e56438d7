use super::conjugate::{find_conjugate_in, kernel_of, raw_record, record, Classification, ConjugateOptions};
use super::frozen::{annihilator_basis, conorm, gnorm, Frozen};
use super::model::{check_dims, GeodesicModel, Matrix, Reversed, Vector};
use crate::{Error, Result};

/// A point `(p, q, ξ, η)` of `N*Σ` over the fold `v`.
#[derive(Clone, Debug)]
pub struct ConormalSample {
    pub p: Vector,
    pub q: Vector,
    pub v: Vector,
    pub xi: Vector,
    pub eta: Vector,
    /// Sine of the angle between `(ξ, η)` and `(g(p)α, -g(q)J̇(1))` for the
    /// kernel Jacobi field; Riemannian models only.
    pub jacobi_collinearity: Option<f64>,
}

pub(crate) fn left_null(dv: &Matrix) -> Vector {
    // right singular vectors of the transpose; the U factor of an SVD loses
    // accuracy on tiny singular values
    let (_, a) = kernel_of(&dv.transpose(), 0.0);
    a
}

fn sine_between(a: &Vector, b: &Vector) -> f64 {
    let c = a.dot(b) / (a.norm() * b.norm());
    (1.0 - c * c).max(0.0).sqrt()
}

fn stack(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// Conormal covectors at a fold conjugate vector: `η` annihilates the range
/// of `d_v exp_p(v)` and `ξ = -η∘d_p exp_p(v)`; `η` has unit dual length
/// at `q`.
pub fn conormal_bundle(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    opts: &ConjugateOptions,
) -> Result<ConormalSample> {
    check_dims(model, &[p, v])?;
    let t = gnorm(&model.metric(p), v);
    let rec = record(model, p, v, t, opts, false)?;
    if rec.kernel_dim != 1 || rec.classification != Classification::Fold {
        return Err(Error::NotSimpleFold);
    }
    sample_at(model, p, v, &rec.normal, None)
}

fn sample_at(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    alpha: &Vector,
    reference: Option<&Vector>,
) -> Result<ConormalSample> {
    let e = Frozen::new(model, p, v)?.exp(v)?;
    let gq = model.metric(&e.q);
    let mut a = left_null(&e.dv);
    a /= conorm(&gq, &a);
    let mut xi = (a.transpose() * &e.dp).transpose();
    if let Some(r) = reference {
        if xi.dot(r) < 0.0 {
            a = -a;
            xi = -xi;
        }
    }
    let eta = -a;
    let jacobi_collinearity = model.riemannian().then(|| {
        let gp = model.metric(p);
        let jdot = &e.dqdot_v * alpha;
        sine_between(&stack(&xi, &eta), &stack(&(&gp * alpha), &-(&gq * jdot)))
    });
    Ok(ConormalSample {
        p: p.clone(),
        q: e.q,
        v: v.clone(),
        xi,
        eta,
        jacobi_collinearity,
    })
}

/// Conormal sample at the conjugate vector along `θ` near `t_guess`, with `ξ`
/// oriented against `reference`. Fails with `StratumExited` off the fold
/// stratum.
pub(crate) fn conormal_near(
    model: &dyn GeodesicModel,
    p: &Vector,
    theta: &Vector,
    t_guess: f64,
    reference: Option<&Vector>,
    opts: &ConjugateOptions,
) -> Result<ConormalSample> {
    let inner = ConjugateOptions { neighbours: 0, ..*opts };
    let rec = find_conjugate_in(model, p, theta, 0.8 * t_guess, 1.2 * t_guess, &inner)?.ok_or(Error::StratumExited)?;
    if rec.kernel_dim != 1 || rec.transversality <= opts.angle_tol || rec.ddet <= opts.ddet_tol {
        return Err(Error::StratumExited);
    }
    sample_at(model, p, &rec.v, &rec.normal, reference)
}

/// The canonical relation as a map: finds the fold conjugate vector near
/// `v_guess` whose `ξ` is a positive multiple of `xi`, and returns the sample
/// scaled so that its `ξ` equals `xi`.
pub fn canonical_map(
    model: &dyn GeodesicModel,
    p: &Vector,
    v_guess: &Vector,
    xi: &Vector,
    opts: &ConjugateOptions,
) -> Result<ConormalSample> {
    check_dims(model, &[p, v_guess, xi])?;
    let g = model.metric(p);
    let t0 = gnorm(&g, v_guess);
    let theta0 = v_guess / t0;
    let basis = annihilator_basis(&g, &(&g * &theta0));
    let target = xi.normalize();
    let tbasis = annihilator_basis(&Matrix::identity(xi.len(), xi.len()), &target);
    let k = basis.ncols();
    let eval = |s: &Vector| -> Result<(Vector, ConormalSample)> {
        let th = &theta0 + &basis * s;
        let smp = conormal_near(model, p, &th, t0, Some(&target), opts)?;
        let r = tbasis.transpose() * smp.xi.normalize();
        Ok((r, smp))
    };
    let mut s = Vector::zeros(k);
    let mut best = eval(&s)?;
    for _ in 0..30 {
        if best.0.norm() < 1e-13 {
            break;
        }
        let h = 1e-6;
        let mut jac = Matrix::zeros(k, k);
        for j in 0..k {
            let mut a = s.clone();
            let mut b = s.clone();
            a[j] += h;
            b[j] -= h;
            let col = (eval(&a)?.0 - eval(&b)?.0) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&best.0).ok_or(Error::NotSimpleFold)?;
        s -= step;
        best = eval(&s)?;
    }
    let (_, mut smp) = best;
    let c = xi.norm() / smp.xi.norm();
    smp.xi = xi.clone();
    smp.eta *= c;
    Ok(smp)
}

/// Whether `(q, w)` is again a fold for the return map, and how far the
/// image of `N_p(v)` under `α ↦ -J̇(1)` is from `N_q(w)`.
#[derive(Clone, Debug)]
pub struct FoldSymmetry {
    pub kernel_dim_q: usize,
    pub classification_q: Classification,
    pub mapped_residual: f64,
}

pub fn fold_symmetry(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    opts: &ConjugateOptions,
) -> Result<FoldSymmetry> {
    check_dims(model, &[p, v])?;
    let t = gnorm(&model.metric(p), v);
    let rec = record(model, p, v, t, opts, false)?;
    let e = Frozen::new(model, p, v)?.exp(v)?;
    let w = e.w();
    let reversed = Reversed(model);
    let back: &dyn GeodesicModel = if model.reversible() { model } else { &reversed };
    let tw = gnorm(&model.metric(&e.q), &w);
    let mut rq = raw_record(back, &e.q, &w, tw, opts)?;
    rq.classification = super::conjugate::classify_caustic(back, &rq, opts)?;
    let er = Frozen::new(back, &e.q, &w)?.exp(&w)?;
    let (kernel_dim_q, _) = kernel_of(&er.dv, opts.kernel_tol);
    let jdot = -(&e.dqdot_v * &rec.normal);
    let mapped_residual = (&er.dv * &jdot).norm() / (er.dv.norm() * jdot.norm());
    Ok(FoldSymmetry {
        kernel_dim_q,
        classification_q: rq.classification,
        mapped_residual,
    })
}
