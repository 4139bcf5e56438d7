//! Exponential map with step control frozen at a reference point, so that
//! finite differences see a smooth function of the initial data.

use nalgebra::SymmetricEigen;

use super::model::{exp_map_counted, invariant_det, ExpMap, GeodesicModel, Matrix, Vector};
use super::ode::OdeSettings;
use crate::Result;

pub(crate) struct Frozen<'a> {
    pub model: &'a dyn GeodesicModel,
    pub p: Vector,
    settings: Option<OdeSettings>,
}

impl<'a> Frozen<'a> {
    pub fn new(model: &'a dyn GeodesicModel, p: &Vector, v: &Vector) -> Result<Self> {
        let settings = if model.exp_closed(p, v).is_some() {
            None
        } else {
            match model.ode() {
                s @ OdeSettings::Fixed { .. } => Some(s),
                s => {
                    let (_, steps) = exp_map_counted(model, p, v, s)?;
                    Some(OdeSettings::Fixed {
                        steps: (2 * steps).max(200),
                    })
                }
            }
        };
        Ok(Self {
            model,
            p: p.clone(),
            settings,
        })
    }

    pub fn at(&self, p: &Vector, v: &Vector) -> Result<ExpMap> {
        match self.settings {
            None => match self.model.exp_closed(p, v) {
                Some(e) => Ok(e),
                None => super::model::exp_map(self.model, p, v),
            },
            Some(s) => exp_map_counted(self.model, p, v, s).map(|(e, _)| e),
        }
    }

    pub fn exp(&self, v: &Vector) -> Result<ExpMap> {
        self.at(&self.p, v)
    }

    pub fn det(&self, v: &Vector) -> Result<f64> {
        let e = self.exp(v)?;
        Ok(invariant_det(self.model, &self.p, &e))
    }

    /// Coordinate gradient of `det d exp_p` at `v` (a covector).
    pub fn grad_det(&self, v: &Vector) -> Result<Vector> {
        let h = 1e-5 * v.norm().max(1e-3);
        let mut g = Vector::zeros(v.len());
        for j in 0..v.len() {
            let mut a = v.clone();
            let mut b = v.clone();
            a[j] += h;
            b[j] -= h;
            g[j] = (self.det(&a)? - self.det(&b)?) / (2.0 * h);
        }
        Ok(g)
    }
}

/// `G^{1/2}` and `G^{-1/2}` for a symmetric positive matrix.
pub(crate) fn sqrt_pair(g: &Matrix) -> (Matrix, Matrix) {
    let eig = SymmetricEigen::new(g.clone());
    let s = eig.eigenvalues.map(f64::sqrt);
    let q = &eig.eigenvectors;
    let half = q * Matrix::from_diagonal(&s) * q.transpose();
    let inv = q * Matrix::from_diagonal(&s.map(|x| 1.0 / x)) * q.transpose();
    (half, inv)
}

/// `|c|` for a covector in the dual metric.
pub(crate) fn conorm(g: &Matrix, c: &Vector) -> f64 {
    let sol = g.clone().lu().solve(c).expect("metric is invertible");
    c.dot(&sol).sqrt()
}

pub(crate) fn gnorm(g: &Matrix, v: &Vector) -> f64 {
    (v.transpose() * g * v)[(0, 0)].sqrt()
}

/// A `g`-orthonormal basis of the kernel of the covector `c`, as columns.
pub(crate) fn annihilator_basis(g: &Matrix, c: &Vector) -> Matrix {
    let n = c.len();
    let (_, inv) = sqrt_pair(g);
    // in y = G^{1/2} δ the condition is (G^{-1/2} c)·y = 0
    let u = (&inv * c).normalize();
    let mut cols: Vec<Vector> = Vec::with_capacity(n - 1);
    for k in 0..n {
        let mut e = Vector::zeros(n);
        e[k] = 1.0;
        let mut y = &e - &u * u.dot(&e);
        for b in &cols {
            y -= b * b.dot(&y);
        }
        if y.norm() > 1e-3 {
            cols.push(y.normalize());
        }
        if cols.len() == n - 1 {
            break;
        }
    }
    let y = Matrix::from_columns(&cols);
    inv * y
}
