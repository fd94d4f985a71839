pub mod baselines;
pub mod bench;
pub mod condense;
pub mod error;
pub mod graph;
pub mod grid;
pub mod index;
pub mod pruning;
pub mod query;
pub mod workload;

pub use error::{Error, GridError, Result};
