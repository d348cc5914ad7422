//! Soft-potential Boltzmann collision quadrature, weighted time stepping
//! and numerical certificates for the near-Maxwellian decay framework.

pub mod collision;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod report;
pub mod verify;
pub mod weights;

pub use collision::{DistributionField, MomentVector, Representation, SpatialLayout};
pub use error::{Error, Result};
pub use kernel::{CollisionQuadrature, ModelParams, OutOfGrid, SphereRule, VelocityGrid};
pub use weights::WeightParams;
