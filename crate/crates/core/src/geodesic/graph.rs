use super::conjugate::ConjugateOptions;
use super::conormal::conormal_near;
use super::frozen::{annihilator_basis, gnorm};
use super::model::{check_dims, GeodesicModel, Matrix, Vector};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GraphReport {
    pub rank: usize,
    pub is_graph: bool,
    /// Full rank, `2·dim - 1`.
    pub expected: usize,
    pub singular_values: Vec<f64>,
}

/// Rank of the projection of `N*Σ` to `(p, ξ)` near the fold `(p, v)`,
/// modulo dilation in `ξ`. The relation is a local canonical graph exactly
/// when the rank is `2·dim - 1`.
pub fn graph_test(
    model: &dyn GeodesicModel,
    p: &Vector,
    v: &Vector,
    scale: f64,
    opts: &ConjugateOptions,
) -> Result<GraphReport> {
    check_dims(model, &[p, v])?;
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("perturbation scale must be positive, got {scale}")));
    }
    let n = model.dim();
    let g = model.metric(p);
    let t0 = gnorm(&g, v);
    let theta0 = v / t0;
    let dirs = annihilator_basis(&g, &(&g * &theta0));
    let base = conormal_near(model, p, &theta0, t0, None, opts)?;
    let xi0 = base.xi.normalize();
    let xbasis = annihilator_basis(&Matrix::identity(n, n), &xi0);
    let m = 2 * n - 1;
    let eval = |z: &Vector| -> Result<Vector> {
        let pp = p + z.rows(0, n);
        let th = &theta0 + &dirs * z.rows(n, n - 1);
        let s = conormal_near(model, &pp, &th, t0, Some(&xi0), opts)?;
        let xi_t = xbasis.transpose() * s.xi.normalize();
        Ok(Vector::from_iterator(m, pp.iter().chain(xi_t.iter()).copied()))
    };
    let mut jac = Matrix::zeros(m, m);
    for j in 0..m {
        let mut a = Vector::zeros(m);
        let mut b = Vector::zeros(m);
        a[j] = scale;
        b[j] = -scale;
        let col = (eval(&a)? - eval(&b)?) / (2.0 * scale);
        jac.set_column(j, &col);
    }
    let sv = jac.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-6 * smax).count();
    let mut singular_values: Vec<f64> = sv.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(GraphReport {
        rank,
        is_graph: rank == m,
        expected: m,
        singular_values,
    })
}
