use crate::condense::Condensation;
use crate::error::Result;
use crate::graph::VertexId;
use crate::grid::Rect;
use crate::query::{check_query, guided_dfs, QueryOutcome, Termination, Verdict};

/// Unpruned depth-first search for a reachable point inside `r`.
///
/// Runs over the condensation with the same expansion order as the pruned
/// query, so the `expanded` counters of the two are directly comparable.
pub fn traversal_query(cond: &Condensation, v: VertexId, r: &Rect) -> Result<QueryOutcome> {
    check_query(cond.component_assignment().len(), v, r)?;
    Ok(guided_dfs(cond, cond.component_of(v), |c| {
        if cond.points(c).iter().any(|p| r.contains_point(*p)) {
            Verdict::Hit(Termination::SpatialHit)
        } else {
            Verdict::Continue
        }
    }))
}
