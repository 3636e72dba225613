//! Truncated Hilbert transform with overlap: the sampled operator, an
//! accurate singular value decomposition, the asymptotic laws of its
//! spectrum, regularized inversion and stability bounds on a region of
//! interest.

pub mod asymptotics;
pub mod bounds;
pub mod error;
pub mod geometry;
mod linalg;
pub mod operator;
pub mod quadrature;
pub mod regularization;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{Geometry, GeometryConstants, RoiParam};
pub use operator::{build_operator, DiscreteOperator, SampledGrid};
pub use spectral::{compute_svd, SingularSystem, TailFit, Triple};
