use crate::geodesic::model::{GeodesicModel, Matrix, Vector};
use crate::geodesic::ExpMap;

/// Flat space: straight lines, no conjugate points.
#[derive(Clone, Debug, PartialEq)]
pub struct Euclidean {
    pub dim: usize,
}

impl GeodesicModel for Euclidean {
    fn name(&self) -> String {
        format!("euclidean{}d", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, _x: &Vector) -> Matrix {
        Matrix::identity(self.dim, self.dim)
    }

    fn accel(&self, _x: &Vector, _u: &Vector) -> Vector {
        Vector::zeros(self.dim)
    }

    fn accel_jacobian(&self, _x: &Vector, _u: &Vector) -> (Matrix, Matrix) {
        (Matrix::zeros(self.dim, self.dim), Matrix::zeros(self.dim, self.dim))
    }

    fn riemannian(&self) -> bool {
        true
    }

    fn flow_closed(&self, p: &Vector, u: &Vector, t: f64) -> Option<(Vector, Vector)> {
        Some((p + u * t, u.clone()))
    }

    fn exp_closed(&self, p: &Vector, v: &Vector) -> Option<ExpMap> {
        let id = Matrix::identity(self.dim, self.dim);
        Some(ExpMap {
            q: p + v,
            qdot: v.clone(),
            dv: id.clone(),
            dp: id.clone(),
            dqdot_v: id,
        })
    }
}
