//! Equivariant estimation of Fréchet means on Riemannian manifolds.
//!
//! The geometry layer in [`manifolds`] and the solvers in [`frechet`] are
//! generic over [`scalar::Real`]. Everything that samples, runs chains or
//! estimates works in `f64` through the aliases below.

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod frechet;
pub mod harness;
pub mod manifolds;
pub mod mcmc;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type UnitVector = manifolds::UnitVector<f64>;
pub type HyperboloidPoint = manifolds::HyperboloidPoint<f64>;
pub type TorusPoint = manifolds::TorusPoint<f64>;
pub type SpdMatrix = manifolds::SpdMatrix<f64>;
pub type StiefelFrame = manifolds::StiefelFrame<f64>;
pub type ManifoldPoint = manifolds::ManifoldPoint<f64>;
pub type Isometry = manifolds::Isometry<f64>;
