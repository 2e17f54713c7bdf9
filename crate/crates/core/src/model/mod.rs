//! Graph and data primitives shared by every other module.

mod dag;
mod dataset;
mod dsep;
mod network;
mod pdag;
mod subset;

pub use dag::Dag;
pub use dataset::{Dataset, Variable, MAX_ARITY};
pub use dsep::d_separated;
pub use network::BayesianNetwork;
pub use pdag::Pdag;
pub use subset::{remove_bit, subsets_by_cardinality, NodeSubset};
