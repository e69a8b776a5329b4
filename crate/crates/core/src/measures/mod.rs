//! Measure representations at the three levels, and the structural
//! operators between them.

mod discrete;
mod empirical;
mod ensemble;
mod grid;
pub mod io;
mod meta;
mod sampling;

pub use discrete::{
    discrete_empirical_pushforward, injective_fraction, marginal, tensor_lift, DiscreteSymmetricMeasure,
    MAX_TABLE_ENTRIES,
};
pub use empirical::{empirical_lift, EmpiricalMeasure};
pub use ensemble::ParticleEnsemble;
pub use grid::{GridDensity, MASS_TOLERANCE};
pub use meta::{Measure, MetaMeasure};
pub use sampling::{sample_product, InverseCdf};
