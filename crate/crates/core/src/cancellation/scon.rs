use crate::geodesic::frozen::annihilator_basis;
use crate::geodesic::{conormal_bundle, find_conjugate, ConjugateOptions, GeodesicModel, Vector};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct SconReport {
    /// Some direction `θ₁ ⟂ ξ₁` has a conjugate locus whose conormal at `p₀`
    /// is not `±ξ₁`.
    pub holds: bool,
    pub witness: Option<Vector>,
    /// Per candidate: the direction and the angle between the conormal and
    /// the line of `ξ₁` (`None` when no fold was found).
    pub candidates: Vec<(Vector, Option<f64>)>,
}

/// Searches directions `θ₁` with `ξ₁(θ₁) = 0` for one whose conjugate point
/// `q` has `ξ₁` not conormal to `Σ(q)` at `p₀`.
pub fn scon_probe(
    model: &dyn GeodesicModel,
    p0: &Vector,
    xi1: &Vector,
    candidates: usize,
    t_max: f64,
) -> Result<SconReport> {
    if xi1.len() != model.dim() || p0.len() != model.dim() {
        return Err(Error::InvalidArgument("p0 and xi1 must match the model dimension".into()));
    }
    if candidates == 0 || xi1.norm() == 0.0 {
        return Err(Error::InvalidArgument("need a nonzero covector and at least one candidate".into()));
    }
    let opts = ConjugateOptions::default();
    let g = model.metric(p0);
    let basis = annihilator_basis(&g, xi1);
    let dirs: Vec<Vector> = (0..candidates)
        .map(|i| {
            if basis.ncols() == 1 {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                basis.column(0) * s
            } else {
                let a = std::f64::consts::TAU * (i as f64 + 0.5) / candidates as f64;
                basis.column(0) * a.cos() + basis.column(1) * a.sin()
            }
        })
        .collect();
    let line = xi1.normalize();
    let mut out = SconReport {
        holds: false,
        witness: None,
        candidates: Vec::with_capacity(dirs.len()),
    };
    let mut any = false;
    for th in dirs {
        let angle = match find_conjugate(model, p0, &th, t_max, &opts)? {
            Some(rec) => {
                any = true;
                match conormal_bundle(model, p0, &rec.v, &opts) {
                    Ok(s) => Some(s.xi.normalize().dot(&line).abs().min(1.0).acos()),
                    Err(Error::NotSimpleFold) => None,
                    Err(e) => return Err(e),
                }
            }
            None => None,
        };
        if let Some(a) = angle {
            if a > 1e-3 && !out.holds {
                out.holds = true;
                out.witness = Some(th.clone());
            }
        }
        out.candidates.push((th, angle));
    }
    if !any {
        return Err(Error::NoCaustic);
    }
    Ok(out)
}
