use crate::geodesic::model::{GeodesicModel, Matrix, Vector};
use crate::geodesic::ExpMap;

/// Product of a planar model with a Euclidean line.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductWithLine<M> {
    pub factor: M,
}

fn split(x: &Vector) -> (Vector, f64) {
    (Vector::from_column_slice(&x.as_slice()[..2]), x[2])
}

fn join(a: &Vector, b: f64) -> Vector {
    Vector::from_column_slice(&[a[0], a[1], b])
}

fn block(a: &Matrix, corner: f64) -> Matrix {
    let mut m = Matrix::zeros(3, 3);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m[(2, 2)] = corner;
    m
}

impl<M: GeodesicModel> GeodesicModel for ProductWithLine<M> {
    fn name(&self) -> String {
        format!("product({}×line)", self.factor.name())
    }

    fn dim(&self) -> usize {
        3
    }

    fn metric(&self, x: &Vector) -> Matrix {
        block(&self.factor.metric(&split(x).0), 1.0)
    }

    fn accel(&self, x: &Vector, u: &Vector) -> Vector {
        join(&self.factor.accel(&split(x).0, &split(u).0), 0.0)
    }

    fn accel_jacobian(&self, x: &Vector, u: &Vector) -> (Matrix, Matrix) {
        let (fx, fu) = self.factor.accel_jacobian(&split(x).0, &split(u).0);
        (block(&fx, 0.0), block(&fu, 0.0))
    }

    fn riemannian(&self) -> bool {
        self.factor.riemannian()
    }

    fn reversible(&self) -> bool {
        self.factor.reversible()
    }

    fn flow_closed(&self, p: &Vector, u: &Vector, t: f64) -> Option<(Vector, Vector)> {
        let (p1, p2) = split(p);
        let (u1, u2) = split(u);
        let (x, v) = self.factor.flow_closed(&p1, &u1, t)?;
        Some((join(&x, p2 + u2 * t), join(&v, u2)))
    }

    fn exp_closed(&self, p: &Vector, v: &Vector) -> Option<ExpMap> {
        let (p1, p2) = split(p);
        let (v1, v2) = split(v);
        let e = self.factor.exp_closed(&p1, &v1)?;
        Some(ExpMap {
            q: join(&e.q, p2 + v2),
            qdot: join(&e.qdot, v2),
            dv: block(&e.dv, 1.0),
            dp: block(&e.dp, 1.0),
            dqdot_v: block(&e.dqdot_v, 1.0),
        })
    }
}
