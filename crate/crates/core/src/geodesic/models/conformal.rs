use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::geodesic::model::{fd_jacobian, GeodesicModel, Matrix, Vector};
use crate::geodesic::ode::OdeSettings;
use crate::geodesic::ExpMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Flat,
    /// `c = (1 + |x|²)/2`: the unit sphere in stereographic coordinates.
    Sphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub amplitude: f64,
    pub width: f64,
}

/// Wave speed `c(x) = base(x)·(1 + Σ aᵢ exp(-|x-cᵢ|²/(2wᵢ²)))` of the metric
/// `c⁻²(dx² + dy²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalSpeed {
    pub base: Base,
    #[serde(default)]
    pub bumps: Vec<Bump>,
}

impl ConformalSpeed {
    /// Value, gradient and Hessian.
    pub fn eval(&self, x: &Vector2<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (b, db, hb) = match self.base {
            Base::Flat => (1.0, Vector2::zeros(), Matrix2::zeros()),
            Base::Sphere => (0.5 * (1.0 + x.norm_squared()), *x, Matrix2::identity()),
        };
        let mut m = 1.0;
        let mut dm = Vector2::zeros();
        let mut hm = Matrix2::zeros();
        for bump in &self.bumps {
            let d = x - Vector2::from(bump.center);
            let w2 = bump.width * bump.width;
            let g = bump.amplitude * (-d.norm_squared() / (2.0 * w2)).exp();
            m += g;
            dm -= d * (g / w2);
            hm += (d * d.transpose() / (w2 * w2) - Matrix2::identity() / w2) * g;
        }
        let c = b * m;
        let dc = db * m + dm * b;
        let hc = hb * m + db * dm.transpose() + dm * db.transpose() + hm * b;
        (c, dc, hc)
    }
}

/// Geodesics of `c(x)⁻²(dx² + dy²)`, integrated numerically.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMetric {
    pub speed: ConformalSpeed,
    pub settings: OdeSettings,
    pub label: String,
}

impl ConformalMetric {
    pub fn new(speed: ConformalSpeed, label: impl Into<String>) -> Self {
        Self {
            speed,
            settings: OdeSettings::Adaptive { tol: 1e-12 },
            label: label.into(),
        }
    }

    /// The round sphere without its closed form.
    pub fn sphere_chart() -> Self {
        Self::new(
            ConformalSpeed {
                base: Base::Sphere,
                bumps: vec![],
            },
            "conformal:sphere",
        )
    }
}

fn v2(x: &Vector) -> Vector2<f64> {
    Vector2::new(x[0], x[1])
}

impl GeodesicModel for ConformalMetric {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn dim(&self) -> usize {
        2
    }

    fn metric(&self, x: &Vector) -> Matrix {
        let (c, _, _) = self.speed.eval(&v2(x));
        Matrix::identity(2, 2) / (c * c)
    }

    fn riemannian(&self) -> bool {
        true
    }

    fn ode(&self) -> OdeSettings {
        self.settings
    }

    fn accel(&self, x: &Vector, u: &Vector) -> Vector {
        // ẍ = 2(u·∇c/c) u − |u|² ∇c/c
        let (c, dc, _) = self.speed.eval(&v2(x));
        let g = dc / c;
        let u = v2(u);
        let a = u * (2.0 * u.dot(&g)) - g * u.norm_squared();
        Vector::from_column_slice(a.as_slice())
    }

    fn accel_jacobian(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        let (c, dc, hc) = self.speed.eval(&v2(x));
        let g = dc / c;
        let dg = hc / c - dc * dc.transpose() / (c * c);
        let u = v2(u);
        let fx = u * (u.transpose() * dg) * 2.0 - dg * u.norm_squared();
        let fu = Matrix2::identity() * (2.0 * u.dot(&g)) + u * g.transpose() * 2.0 - g * u.transpose() * 2.0;
        (
            Matrix::from_column_slice(2, 2, fx.as_slice()),
            Matrix::from_column_slice(2, 2, fu.as_slice()),
        )
    }
}

/// Round unit sphere in the stereographic chart from the north pole, with the
/// exponential map in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundSphere {
    chart: ConformalMetric,
}

impl Default for RoundSphere {
    fn default() -> Self {
        Self {
            chart: ConformalMetric::sphere_chart(),
        }
    }
}

pub fn inverse_stereographic(x: &Vector2<f64>) -> Vector3<f64> {
    let r2 = x.norm_squared();
    Vector3::new(2.0 * x[0], 2.0 * x[1], r2 - 1.0) / (1.0 + r2)
}

pub fn d_inverse_stereographic(x: &Vector2<f64>) -> Matrix3x2<f64> {
    let r2 = x.norm_squared();
    let d = 1.0 + r2;
    let (a, b) = (x[0], x[1]);
    Matrix3x2::new(
        2.0 * (d - 2.0 * a * a) / (d * d),
        -4.0 * a * b / (d * d),
        -4.0 * a * b / (d * d),
        2.0 * (d - 2.0 * b * b) / (d * d),
        4.0 * a / (d * d),
        4.0 * b / (d * d),
    )
}

pub fn stereographic(p: &Vector3<f64>) -> Vector2<f64> {
    Vector2::new(p[0], p[1]) / (1.0 - p[2])
}

fn d_stereographic(p: &Vector3<f64>) -> Matrix2x3<f64> {
    let m = 1.0 - p[2];
    Matrix2x3::new(1.0 / m, 0.0, p[0] / (m * m), 0.0, 1.0 / m, p[1] / (m * m))
}

struct Lifted {
    pos: Vector3<f64>,
    vel: Vector3<f64>,
    /// `∂pos/∂U` and `∂vel/∂U` for the ambient initial velocity `U`.
    dpos: Matrix3<f64>,
    dvel: Matrix3<f64>,
}

fn great_circle(big_p: &Vector3<f64>, big_u: &Vector3<f64>, t: f64) -> Lifted {
    let s = big_u.norm();
    if s == 0.0 {
        return Lifted {
            pos: *big_p,
            vel: Vector3::zeros(),
            dpos: Matrix3::identity() * t,
            dvel: Matrix3::identity(),
        };
    }
    let st = s * t;
    let (sn, cs) = st.sin_cos();
    let uhat = big_u / s;
    // d/ds of sin(st)/s
    let dsinc = (t * cs * s - sn) / (s * s);
    let pos = big_p * cs + big_u * (sn / s);
    let vel = -big_p * (s * sn) + big_u * cs;
    let dpos = -big_p * (t * sn) * uhat.transpose() + Matrix3::identity() * (sn / s) + big_u * dsinc * uhat.transpose();
    let dvel = -big_p * (sn + st * cs) * uhat.transpose() + Matrix3::identity() * cs - big_u * (t * sn) * uhat.transpose();
    Lifted { pos, vel, dpos, dvel }
}

/// Derivative of `E ↦ dσ(E)·V` for the stereographic projection `σ`.
fn d_stereographic_applied(p: &Vector3<f64>, v: &Vector3<f64>) -> Matrix2x3<f64> {
    let m = 1.0 - p[2];
    let (m2, m3) = (m * m, m * m * m);
    Matrix2x3::new(
        v[2] / m2,
        0.0,
        v[0] / m2 + 2.0 * p[0] * v[2] / m3,
        0.0,
        v[2] / m2,
        v[1] / m2 + 2.0 * p[1] * v[2] / m3,
    )
}

impl RoundSphere {
    fn lift(&self, x: &Vector, u: &Vector, t: f64) -> (Lifted, Matrix3x2<f64>) {
        let x = v2(x);
        let d = d_inverse_stereographic(&x);
        (great_circle(&inverse_stereographic(&x), &(d * v2(u)), t), d)
    }

    fn flow3(&self, p: &Vector, u: &Vector, t: f64) -> (Vector, Vector) {
        let (l, _) = self.lift(p, u, t);
        let q = stereographic(&l.pos);
        let qdot = d_stereographic(&l.pos) * l.vel;
        (to_dyn(q.as_slice()), to_dyn(qdot.as_slice()))
    }
}

fn to_dyn(s: &[f64]) -> Vector {
    Vector::from_column_slice(s)
}

impl GeodesicModel for RoundSphere {
    fn name(&self) -> String {
        "sphere".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn metric(&self, x: &Vector) -> Matrix {
        self.chart.metric(x)
    }

    fn accel(&self, x: &Vector, u: &Vector) -> Vector {
        self.chart.accel(x, u)
    }

    fn accel_jacobian(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        self.chart.accel_jacobian(x, u)
    }

    fn riemannian(&self) -> bool {
        true
    }

    fn ode(&self) -> OdeSettings {
        self.chart.settings
    }

    fn flow_closed(&self, p: &Vector, u: &Vector, t: f64) -> Option<(Vector, Vector)> {
        Some(self.flow3(p, u, t))
    }

    fn exp_closed(&self, p: &Vector, v: &Vector) -> Option<ExpMap> {
        let (l, d) = self.lift(p, v, 1.0);
        let ds = d_stereographic(&l.pos);
        let dv = ds * l.dpos * d;
        let dqdot_v = (d_stereographic_applied(&l.pos, &l.vel) * l.dpos + ds * l.dvel) * d;
        let dp = fd_jacobian(|x| Ok(self.flow3(x, v, 1.0).0), p, 1e-5 * (1.0 + p.norm())).ok()?;
        Some(ExpMap {
            q: to_dyn(stereographic(&l.pos).as_slice()),
            qdot: to_dyn((ds * l.vel).as_slice()),
            dv: Matrix::from_column_slice(2, 2, dv.as_slice()),
            dp,
            dqdot_v: Matrix::from_column_slice(2, 2, dqdot_v.as_slice()),
        })
    }
}
