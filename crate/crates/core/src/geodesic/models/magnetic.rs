use nalgebra::Matrix2;

use crate::geodesic::model::{GeodesicModel, Matrix, Vector};
use crate::geodesic::ExpMap;

/// Constant-strength magnetic flow: the first two velocity components rotate
/// at angular rate `rate·|u|`; a third component, if present, is carried
/// along unchanged.
///
/// `circle2d` is the planar case with rate −1 (clockwise unit circles);
/// `magnetic3d(α)` is the spatial case with field `α e₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct MagneticFlow {
    dim: usize,
    rate: f64,
}

impl MagneticFlow {
    /// Unit-speed curves are clockwise unit circles.
    pub fn circle2d() -> Self {
        Self { dim: 2, rate: -1.0 }
    }

    /// `ẍ = α|ẋ| e₃ × ẋ` in ℝ³.
    pub fn magnetic3d(alpha: f64) -> Self {
        assert!(alpha != 0.0, "field strength must be nonzero");
        Self { dim: 3, rate: alpha }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

fn rot(a: f64) -> Matrix2<f64> {
    let (s, c) = a.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn rot_prime(a: f64) -> Matrix2<f64> {
    let (s, c) = a.sin_cos();
    Matrix2::new(-s, -c, c, -s)
}

/// `∫₀¹ rot(a τ) dτ`.
fn integral(a: f64) -> Matrix2<f64> {
    if a.abs() < 1e-8 {
        return Matrix2::identity() + Matrix2::new(0.0, -a / 2.0, a / 2.0, 0.0);
    }
    let (s, c) = a.sin_cos();
    Matrix2::new(s, c - 1.0, 1.0 - c, s) / a
}

impl GeodesicModel for MagneticFlow {
    fn name(&self) -> String {
        if self.dim == 2 {
            "circle2d".into()
        } else {
            format!("magnetic3d:{}", self.rate)
        }
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, _x: &Vector) -> Matrix {
        Matrix::identity(self.dim, self.dim)
    }

    fn accel(&self, _x: &Vector, u: &Vector) -> Vector {
        let mut a = Vector::zeros(self.dim);
        let s = self.rate * u.norm();
        a[0] = -s * u[1];
        a[1] = s * u[0];
        a
    }

    fn accel_jacobian(&self, _x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        let n = self.dim;
        let speed = u.norm();
        let mut fu = Matrix::zeros(n, n);
        let perp = [-u[1], u[0]];
        for (r, pr) in perp.iter().enumerate() {
            for c in 0..n {
                fu[(r, c)] = self.rate * pr * u[c] / speed;
            }
        }
        fu[(0, 1)] -= self.rate * speed;
        fu[(1, 0)] += self.rate * speed;
        (Matrix::zeros(n, n), fu)
    }

    fn flow_closed(&self, p: &Vector, u: &Vector, t: f64) -> Option<(Vector, Vector)> {
        let a = self.rate * u.norm() * t;
        let uh = nalgebra::Vector2::new(u[0], u[1]);
        let xh = integral(a) * uh * t;
        let vh = rot(a) * uh;
        let mut x = p.clone();
        let mut v = u.clone();
        x[0] += xh[0];
        x[1] += xh[1];
        v[0] = vh[0];
        v[1] = vh[1];
        if self.dim == 3 {
            x[2] += u[2] * t;
        }
        Some((x, v))
    }

    fn exp_closed(&self, p: &Vector, v: &Vector) -> Option<ExpMap> {
        let n = self.dim;
        let s = v.norm();
        let (q, qdot) = self.flow_closed(p, v, 1.0)?;
        let vh = nalgebra::Vector2::new(v[0], v[1]);
        let a = self.rate * s;
        let k = integral(a);
        let mut dv = Matrix::identity(n, n);
        let mut dqdot = Matrix::identity(n, n);
        let r = rot(a);
        for i in 0..2 {
            for j in 0..2 {
                dv[(i, j)] = k[(i, j)];
                dqdot[(i, j)] = r[(i, j)];
            }
        }
        if s > 0.0 {
            // s-dependence: d/ds K = (rot(a) - K)/s, d/ds rot(a) = rate·rot'(a)
            let dk = (r - k) / s * vh;
            let dr = rot_prime(a) * vh * self.rate;
            for i in 0..2 {
                for j in 0..n {
                    let vhat = v[j] / s;
                    dv[(i, j)] += dk[i] * vhat;
                    dqdot[(i, j)] += dr[i] * vhat;
                }
            }
        }
        Some(ExpMap {
            q,
            qdot,
            dv,
            dp: Matrix::identity(n, n),
            dqdot_v: dqdot,
        })
    }
}
