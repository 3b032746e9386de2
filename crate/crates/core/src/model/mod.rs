//! Parameters, sentence representation, simplex embedding and the
//! long-range Potts energy.

mod energy;
mod params;
mod sentence;
mod simplex;

pub use energy::{energy_gap, total_energy, Couplings};
pub use params::{Branching, ModelParams};
pub(crate) use params::{temperature_list, temperature_serde};
pub use sentence::SentenceState;
pub use simplex::{build_simplex_basis, SimplexBasis};
