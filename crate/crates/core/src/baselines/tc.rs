use crate::condense::{condense, ComponentId, Condensation};
use crate::error::{Error, Result};
use crate::graph::{DirectedPropertyGraph, VertexId};
use crate::grid::{Rect, SpatialPoint};
use crate::query::check_query;

/// Graphs condensing to more components than this are refused.
pub const TC_COMPONENT_LIMIT: usize = 50_000;

/// Per-component bitsets over the spatial components reachable from it
/// (reflexively).
#[derive(Debug, Clone)]
pub struct TransitiveClosure {
    cond: Condensation,
    /// Bit position to component.
    spatial: Vec<ComponentId>,
    words: usize,
    rows: Vec<u64>,
}

pub fn build_tc(g: &DirectedPropertyGraph) -> Result<TransitiveClosure> {
    let cond = condense(g);
    if cond.num_components() > TC_COMPONENT_LIMIT {
        return Err(Error::ClosureTooLarge {
            components: cond.num_components(),
            limit: TC_COMPONENT_LIMIT,
        });
    }
    let spatial: Vec<ComponentId> = cond.components().filter(|&c| cond.is_spatial(c)).collect();
    let mut bit_of = vec![usize::MAX; cond.num_slots()];
    for (i, &c) in spatial.iter().enumerate() {
        bit_of[c] = i;
    }
    let words = spatial.len().div_ceil(64);
    let mut rows = vec![0u64; words * cond.num_slots()];
    for c in cond.reverse_topological_order() {
        if bit_of[c] != usize::MAX {
            rows[c * words + bit_of[c] / 64] |= 1 << (bit_of[c] % 64);
        }
        for w in cond.out_neighbors(c) {
            for k in 0..words {
                rows[c * words + k] |= rows[w * words + k];
            }
        }
    }
    Ok(TransitiveClosure {
        cond,
        spatial,
        words,
        rows,
    })
}

impl TransitiveClosure {
    fn row(&self, c: ComponentId) -> &[u64] {
        &self.rows[c * self.words..(c + 1) * self.words]
    }

    /// Spatial points reachable from `v`, itself included.
    pub fn reachable_points(&self, v: VertexId) -> impl Iterator<Item = SpatialPoint> + '_ {
        let row = self.row(self.cond.component_of(v));
        row.iter()
            .enumerate()
            .flat_map(|(k, &w)| (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| k * 64 + b))
            .flat_map(|i| self.cond.points(self.spatial[i]).iter().copied())
    }

    pub fn bytes(&self) -> usize {
        self.rows.len() * 8
    }
}

/// Scans the closure row of `v` for a point inside `r`.
pub fn tc_query(tc: &TransitiveClosure, v: VertexId, r: &Rect) -> Result<bool> {
    check_query(tc.cond.component_assignment().len(), v, r)?;
    Ok(tc.reachable_points(v).any(|p| r.contains_point(p)))
}
