//! Bilinear collision operator Q±, the perturbative nonlinearity Γ±,
//! discrete conservation projection and entropy functionals.

mod entropy;
mod field;
mod operator;
mod project;

pub use entropy::{boltzmann_h, entropy_l2_split, relative_entropy, relative_entropy_density};
pub use field::{weight_table, DistributionField, MomentVector, Representation, SpatialLayout};
pub use operator::{
    collision_operator, entropy_production, gamma_minus, gamma_nl, gamma_plus, q_gain, q_loss,
};
pub use project::{conservation_project, moment_residuals, ConservationProjector};
