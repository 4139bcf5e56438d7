//! Numerical toolkit for X-ray and circular Radon transforms with fold
//! conjugate points.
//!
//! The crate is split the same way the experiments are:
//!
//! * [`field`] holds periodic planar grids, FFTs, wavepackets and the
//!   windowed-frequency probes everything else is measured with.
//! * [`circular`] is the fixed-radius circular transform and its normal
//!   operator, together with the split into a pseudodifferential part and two
//!   phase-shifted Fourier integral parts.
//! * [`cancellation`] builds pairs of packets whose singularities the
//!   localized transform cannot see.
//! * [`geodesic`] carries the exponential-map models, Jacobi propagation and
//!   caustic classification.
//! * [`kernel_probe`] extracts normal-operator kernels near the conjugate
//!   locus and fits the inverse square-root law.
//! * [`sphere`] is the great-circle transform on S².
//! * [`suite`] runs the acceptance experiments and reports their checks.

pub mod cancellation;
pub mod circular;
mod error;
pub mod field;
pub mod geodesic;
pub mod kernel_probe;
pub mod par;
pub mod sphere;
pub mod suite;

pub use error::{Error, Result};
pub use par::Execution;
