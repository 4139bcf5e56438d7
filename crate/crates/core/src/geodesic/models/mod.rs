//! Concrete flows.

mod conformal;
mod euclidean;
mod magnetic;
mod product;

pub use conformal::{
    d_inverse_stereographic, inverse_stereographic, stereographic, Base, Bump, ConformalMetric,
    ConformalSpeed, RoundSphere,
};
pub use euclidean::Euclidean;
pub use magnetic::MagneticFlow;
pub use product::ProductWithLine;
