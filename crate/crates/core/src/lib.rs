//! Instance-dependent complexity toolkit for representation learning in
//! contextual linear bandits.
//!
//! The crate computes the allocation-optimization complexity measures that
//! lower-bound the regret of representation learning, checks the structural
//! conditions governing them (realizability, span/HLS, sub-logarithmic
//! regimes, detectability), builds the benchmark instance families those
//! results are proven on, and simulates bandit algorithms to confront
//! empirical regret with the computed complexities.
//!
//! Data-parallel inner loops (constraint scans, oracle grids, seed sweeps)
//! run on rayon under the default `parallel` feature and degrade to
//! sequential iteration without it; results are bit-identical either way.

pub mod checks;
pub mod constructions;
pub mod error;
pub mod halfspace;
pub mod linalg;
pub mod model;
pub mod par;
pub mod sampling;
pub mod schema;
pub mod simulator;
pub mod solver;

pub use error::{Error, Result};
