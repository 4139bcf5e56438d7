use nalgebra::{DMatrix, DVector};

use super::ode::{integrate, OdeSettings};
use crate::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// A second-order flow `ẍ = F(x, ẋ)` with `F` homogeneous of degree two in
/// `ẋ`, so that `exp_p(tv) = γ_{p,v}(t)`.
pub trait GeodesicModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn metric(&self, x: &Vector) -> Matrix;
    fn accel(&self, x: &Vector, u: &Vector) -> Vector;
    /// `(∂F/∂x, ∂F/∂u)`.
    fn accel_jacobian(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix);

    /// Whether the curves are geodesics of `metric`.
    fn riemannian(&self) -> bool {
        false
    }

    /// Whether reversing a curve gives a curve of the same flow. When false,
    /// the return map uses `γ_{q,-w}(-1)` instead of `exp_q(w)`.
    fn reversible(&self) -> bool {
        self.riemannian()
    }

    fn ode(&self) -> OdeSettings {
        OdeSettings::default()
    }

    /// Exact `exp_p(v)` with differentials, when known.
    fn exp_closed(&self, _p: &Vector, _v: &Vector) -> Option<ExpMap> {
        None
    }

    /// Exact `(γ_{p,u}(t), γ̇_{p,u}(t))` for any real `t`, when known.
    fn flow_closed(&self, _p: &Vector, _u: &Vector, _t: f64) -> Option<(Vector, Vector)> {
        None
    }
}

/// `exp_p(v)` together with its first-order variations.
#[derive(Clone, Debug)]
pub struct ExpMap {
    pub q: Vector,
    /// `γ̇_{p,v}(1)`.
    pub qdot: Vector,
    /// `d_v exp_p(v)`; column `j` is `J(1)` for `J(0) = 0`, `J̇(0) = e_j`.
    pub dv: Matrix,
    /// `d_p exp_p(v)` at fixed `v`.
    pub dp: Matrix,
    /// `∂γ̇(1)/∂v`; column `j` is `J̇(1)` for the same Jacobi field.
    pub dqdot_v: Matrix,
}

impl ExpMap {
    /// `w = -γ̇_{p,v}(1)`.
    pub fn w(&self) -> Vector {
        -&self.qdot
    }
}

pub fn exp_map(model: &dyn GeodesicModel, p: &Vector, v: &Vector) -> Result<ExpMap> {
    match model.exp_closed(p, v) {
        Some(e) => Ok(e),
        None => exp_map_ode(model, p, v, model.ode()),
    }
}

/// Integrates the flow and its variational equations, ignoring closed forms.
pub fn exp_map_ode(model: &dyn GeodesicModel, p: &Vector, v: &Vector, settings: OdeSettings) -> Result<ExpMap> {
    exp_map_counted(model, p, v, settings).map(|(e, _)| e)
}

pub(crate) fn exp_map_counted(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    settings: OdeSettings,
) -> Result<(ExpMap, usize)> {
    let n = model.dim();
    let m = 2 * n;
    let mut y0 = vec![0.0; m + m * m];
    for i in 0..n {
        y0[i] = p[i];
        y0[n + i] = v[i];
    }
    for i in 0..m {
        y0[m + i * m + i] = 1.0;
    }
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let x = Vector::from_column_slice(&y[..n]);
        let u = Vector::from_column_slice(&y[n..m]);
        let a = model.accel(&x, &u);
        let (fx, fu) = model.accel_jacobian(&x, &u);
        dy[..n].copy_from_slice(&y[n..m]);
        dy[n..m].copy_from_slice(a.as_slice());
        // Φ̇ = [[0, I], [Fx, Fu]] Φ, Φ stored row-major
        let phi = &y[m..];
        let dphi = &mut dy[m..];
        for c in 0..m {
            for r in 0..n {
                dphi[r * m + c] = phi[(n + r) * m + c];
                let mut acc = 0.0;
                for k in 0..n {
                    acc += fx[(r, k)] * phi[k * m + c] + fu[(r, k)] * phi[(n + k) * m + c];
                }
                dphi[(n + r) * m + c] = acc;
            }
        }
    };
    let sol = integrate(rhs, &y0, 0.0, 1.0, settings)?;
    let y = sol.y;
    let phi = |r: usize, c: usize| y[m + r * m + c];
    let e = ExpMap {
        q: Vector::from_column_slice(&y[..n]),
        qdot: Vector::from_column_slice(&y[n..m]),
        dp: Matrix::from_fn(n, n, &phi),
        dv: Matrix::from_fn(n, n, |r, c| phi(r, n + c)),
        dqdot_v: Matrix::from_fn(n, n, |r, c| phi(n + r, n + c)),
    };
    Ok((e, sol.steps))
}

/// `(γ_{p,u}(t), γ̇_{p,u}(t))`; negative `t` runs the flow backward.
pub fn flow(model: &dyn GeodesicModel, p: &Vector, u: &Vector, t: f64) -> Result<(Vector, Vector)> {
    if let Some(out) = model.flow_closed(p, u, t) {
        return Ok(out);
    }
    let n = model.dim();
    let mut y0 = p.as_slice().to_vec();
    y0.extend_from_slice(u.as_slice());
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let x = Vector::from_column_slice(&y[..n]);
        let v = Vector::from_column_slice(&y[n..]);
        dy[..n].copy_from_slice(&y[n..]);
        dy[n..].copy_from_slice(model.accel(&x, &v).as_slice());
    };
    let settings = match model.ode() {
        OdeSettings::Fixed { steps } => OdeSettings::Fixed {
            steps: ((steps as f64) * t.abs()).ceil().max(1.0) as usize,
        },
        s => s,
    };
    let y = integrate(rhs, &y0, 0.0, t, settings)?.y;
    Ok((Vector::from_column_slice(&y[..n]), Vector::from_column_slice(&y[n..])))
}

/// `(J(t), J̇(t))` along `γ_{p,v}` for `J(0) = 0`, `J̇(0) = α`.
pub fn jacobi_flow(model: &dyn GeodesicModel, p: &Vector, v: &Vector, t: f64, alpha: &Vector) -> Result<(Vector, Vector)> {
    if t == 0.0 {
        return Ok((Vector::zeros(model.dim()), alpha.clone()));
    }
    // γ_{p,v}(t) = exp_p(tv), so J(t) = d_v exp_p(tv)·tα
    let e = exp_map(model, p, &(v * t))?;
    Ok((&e.dv * alpha * t, &e.dqdot_v * alpha))
}

/// The inverse of `(p, v) ↦ (q, w)`: `exp_q(w)` for reversible flows, else
/// `γ_{q,-w}(-1)`. Returns the base point and the velocity there, oriented
/// so that a round trip gives back `(p, v)`.
pub fn return_map(model: &dyn GeodesicModel, q: &Vector, w: &Vector) -> Result<(Vector, Vector)> {
    if model.reversible() {
        let e = exp_map(model, q, w)?;
        let w = e.w();
        Ok((e.q, w))
    } else {
        let e = exp_map(&Reversed(model), q, w)?;
        let w = e.w();
        Ok((e.q, w))
    }
}

/// The flow run backward: `ẍ = F(x, -ẋ)`, so that `exp` of this model at
/// `(q, w)` is `γ_{q,-w}(-1)`.
pub struct Reversed<'a>(pub &'a dyn GeodesicModel);

impl GeodesicModel for Reversed<'_> {
    fn name(&self) -> String {
        format!("reversed({})", self.0.name())
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn metric(&self, x: &Vector) -> Matrix {
        self.0.metric(x)
    }

    fn accel(&self, x: &Vector, u: &Vector) -> Vector {
        self.0.accel(x, &-u)
    }

    fn accel_jacobian(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        let (fx, fu) = self.0.accel_jacobian(x, &-u);
        (fx, -fu)
    }

    fn riemannian(&self) -> bool {
        self.0.riemannian()
    }

    fn reversible(&self) -> bool {
        self.0.reversible()
    }

    fn ode(&self) -> OdeSettings {
        self.0.ode()
    }

    fn flow_closed(&self, p: &Vector, u: &Vector, t: f64) -> Option<(Vector, Vector)> {
        let (x, v) = self.0.flow_closed(p, &-u, -t)?;
        Some((x, -v))
    }
}

/// Riemannian length of `v` at `p`.
pub fn norm_at(model: &dyn GeodesicModel, p: &Vector, v: &Vector) -> f64 {
    (v.transpose() * model.metric(p) * v)[(0, 0)].sqrt()
}

/// Determinant of `d_v exp_p(v)` as a map between the metric volumes of
/// `T_pM` and `T_qM`.
pub fn invariant_det(model: &dyn GeodesicModel, p: &Vector, e: &ExpMap) -> f64 {
    let gp = model.metric(p).determinant();
    let gq = model.metric(&e.q).determinant();
    (gq / gp).sqrt() * e.dv.determinant()
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(&Vector) -> Result<Vector>, x: &Vector, h: f64) -> Result<Matrix> {
    let n = x.len();
    let f0 = f(x)?;
    let mut out = Matrix::zeros(f0.len(), n);
    for j in 0..n {
        let mut a = x.clone();
        let mut b = x.clone();
        a[j] += h;
        b[j] -= h;
        let col = (f(&a)? - f(&b)?) / (2.0 * h);
        out.set_column(j, &col);
    }
    Ok(out)
}

pub(crate) fn check_dims(model: &dyn GeodesicModel, xs: &[&Vector]) -> Result<()> {
    for x in xs {
        if x.len() != model.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {}-vectors, got length {}",
                model.name(),
                model.dim(),
                x.len()
            )));
        }
    }
    Ok(())
}
