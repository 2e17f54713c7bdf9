//! Score-based local learning of Bayesian network structure.
//!
//! The crate learns the neighbors, spouses and Markov blanket of a target
//! variable from discrete data by solving exact score-maximization problems
//! on small, growing node sets, and assembles the local results into a full
//! DAG. Scoring and search are generic over `f32` and `f64`.

pub mod bench;
pub mod cli;
pub mod error;
pub mod exact;
pub mod global;
pub mod greedy;
pub mod io;
pub mod local;
pub mod model;
pub mod num;
pub mod scoring;

pub use error::{Error, Result};

/// BDeu parameters in double precision.
pub type BdeuParams64 = scoring::BdeuParams<f64>;
/// BDeu parameters in single precision.
pub type BdeuParams32 = scoring::BdeuParams<f32>;
/// Local-learning configuration in double precision.
pub type SllConfig64 = local::SllConfig<f64>;
/// Local-learning configuration in single precision.
pub type SllConfig32 = local::SllConfig<f32>;
/// Memoizing scorer in double precision.
pub type Scorer64<'a> = scoring::Scorer<'a, f64>;
/// Memoizing scorer in single precision.
pub type Scorer32<'a> = scoring::Scorer<'a, f32>;
