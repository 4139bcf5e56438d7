use std::sync::Arc;

use super::conjugate::{record, Classification, ConjugateOptions};
use super::frozen::{annihilator_basis, conorm, gnorm, Frozen};
use super::model::{check_dims, GeodesicModel, Vector};
use crate::{Error, Result};

/// Cutoff `κ(x, θ)` on the unit sphere bundle.
pub type Weight = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

/// `κ♯` at the start and `κ` at the end of the curves.
#[derive(Clone)]
pub struct Weights {
    pub kappa_sharp: Weight,
    pub kappa: Weight,
}

impl Default for Weights {
    fn default() -> Self {
        let one: Weight = Arc::new(|_: &Vector, _: &Vector| 1.0);
        Self {
            kappa_sharp: one.clone(),
            kappa: one,
        }
    }
}

impl std::fmt::Debug for Weights {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Weights")
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct SingFitInputs {
    /// `|d det d exp_p(v)|` in the dual metric.
    pub a: f64,
    /// Volume factor of `d exp_p` restricted to `T_vS(p)`.
    pub d: f64,
    pub w_sigma: f64,
    /// Derivative of `det d exp_p` along the unit kernel vector.
    pub b: f64,
    /// Angle between `S(p)` and `N_p(v)`; planar models only.
    pub phi: Option<f64>,
    /// Leading coefficient `√2·W_Σ/√(AD)` of the kernel.
    pub predicted: f64,
}

impl SingFitInputs {
    /// `|B - AD| / B` in the plane.
    pub fn identity_error(&self) -> f64 {
        (self.b - self.a * self.d).abs() / self.b
    }
}

pub fn sing_fit_inputs(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    weights: &Weights,
    opts: &ConjugateOptions,
) -> Result<SingFitInputs> {
    check_dims(model, &[p, v])?;
    let gp = model.metric(p);
    let t = gnorm(&gp, v);
    let rec = record(model, p, v, t, opts, false)?;
    if rec.classification != Classification::Fold {
        return Err(Error::NotSimpleFold);
    }
    let e = Frozen::new(model, p, v)?.exp(v)?;
    let gq = model.metric(&e.q);
    let a = conorm(&gp, &rec.grad_det);
    let tangent = &e.dv * annihilator_basis(&gp, &rec.grad_det);
    let d = (tangent.transpose() * &gq * &tangent).determinant().sqrt();
    let n = model.dim();
    let w = e.w();
    let theta = v / t;
    let w_sigma = t.powi(1 - n as i32) * (weights.kappa_sharp)(p, &theta) * (weights.kappa)(&e.q, &(w / t));
    let b = rec.ddet;
    let phi = (n == 2).then(|| (b / a).clamp(0.0, 1.0).asin());
    Ok(SingFitInputs {
        a,
        d,
        w_sigma,
        b,
        phi,
        predicted: 2f64.sqrt() * w_sigma / (a * d).sqrt(),
    })
}
