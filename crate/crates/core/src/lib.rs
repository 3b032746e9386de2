//! Monte Carlo simulation of a growing-sentence context-sensitive grammar
//! whose context-dependent rewrite is a Metropolis flip in the
//! one-dimensional long-range Potts model.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds parameters, the sentence, the simplex embedding of
//!   symbols and the long-range energy.
//! * [`grammar`] runs the generative process (branch / terminate / flip).
//! * [`observables`] measures magnetization, susceptibilities, the Binder
//!   parameter, correlations, mutual information, histograms and
//!   rank-frequency tables.
//! * [`runner`] sweeps parameter grids over parallel chain ensembles and
//!   writes CSV tables plus a JSON manifest.
//! * [`fss`] does finite-size-scaling collapse, Binder crossings and the
//!   susceptibility-divergence phase boundary.

// `!(x > 0.0)` is the idiom here for "positive and not NaN".
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fss;
pub mod grammar;
pub mod model;
pub mod observables;
pub mod runner;

pub use error::{Error, Result};
pub use grammar::{generate_sentence, ChainRng, GenerationTrace};
pub use model::{build_simplex_basis, energy_gap, total_energy};
pub use model::{Branching, ModelParams, SentenceState, SimplexBasis};
pub use observables::{EnsembleStats, ObservableRecord};
