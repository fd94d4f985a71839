//! Straightforward RangeReach strategies used as oracles and comparators.

mod spareach;
mod tc;
mod traversal;

pub use spareach::{build_spareach, spareach_query, ReachLabels, SpaReach, SpatialIndexGrid};
pub use tc::{build_tc, tc_query, TransitiveClosure, TC_COMPONENT_LIMIT};
pub use traversal::traversal_query;
