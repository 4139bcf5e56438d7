//! Exponential maps of second-order flows, conjugate points and the conormal
//! bundle of the conjugate locus.

pub(crate) mod conjugate;
pub(crate) mod conormal;
pub(crate) mod frozen;
mod graph;
mod model;
pub mod models;
pub mod ode;
mod singfit;

pub use conjugate::{
    classify_caustic, conjugate_locus, find_conjugate, Classification, ConjugateOptions, ConjugateRecord, LocusSample,
};
pub use conormal::{canonical_map, conormal_bundle, fold_symmetry, ConormalSample, FoldSymmetry};
pub use graph::{graph_test, GraphReport};
pub use model::{
    exp_map, exp_map_ode, fd_jacobian, flow, invariant_det, jacobi_flow, norm_at, return_map, ExpMap, GeodesicModel,
    Matrix, Reversed, Vector,
};
pub use ode::OdeSettings;
pub use singfit::{sing_fit_inputs, SingFitInputs, Weight, Weights};

/// Largest of `|flow(p, v, 0) - p|` and the centered-difference error of
/// `d/dt flow` at `t = 0` against `v`.
pub fn check_initial_conditions(model: &dyn GeodesicModel, p: &Vector, v: &Vector) -> crate::Result<f64> {
    model::check_dims(model, &[p, v])?;
    let (x0, _) = flow(model, p, v, 0.0)?;
    let h = 1e-5;
    let (xa, _) = flow(model, p, v, h)?;
    let (xb, _) = flow(model, p, v, -h)?;
    let d = (xa - xb) / (2.0 * h);
    Ok((x0 - p).norm().max((d - v).norm()))
}

/// `|return_map(exp_p(v)) - (p, v)|`.
pub fn check_return(model: &dyn GeodesicModel, p: &Vector, v: &Vector) -> crate::Result<f64> {
    model::check_dims(model, &[p, v])?;
    let e = exp_map(model, p, v)?;
    let (p2, v2) = return_map(model, &e.q, &e.w())?;
    Ok((p2 - p).norm().max((v2 - v).norm()))
}
