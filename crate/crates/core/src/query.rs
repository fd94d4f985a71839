//! RangeReach over the SPA-Graph: depth-first traversal pruned by the
//! per-component payloads.
//!
//! Every component is judged once, when it is first discovered: its own
//! points are tested against the query, then its payload decides between an
//! early `true`, pruning, or further expansion. Expansion judges all unvisited
//! out-neighbours of the current component (ascending id) before descending
//! into the first surviving one.

use rayon::prelude::*;

use crate::condense::{ComponentId, Condensation};
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::grid::{rect_relation, CellId, CellPos, HierarchicalGrid, Rect, Relation};
use crate::index::{CellSet, SpaAux, SpaGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// A reachable spatial vertex lies inside the rectangle.
    SpatialHit,
    /// The rectangle contains an RMBR.
    RContained,
    /// The rectangle contains a reachable grid cell.
    GCellContained,
    /// Nothing left to expand.
    Exhausted,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::SpatialHit => "spatial_hit",
            Termination::RContained => "r_contained",
            Termination::GCellContained => "g_cell_contained",
            Termination::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryOutcome {
    pub answer: bool,
    /// Components whose out-edges were followed.
    pub expanded: usize,
    /// Out-edges of expanded components examined.
    pub edges_relaxed: usize,
    pub pruned_b: usize,
    pub pruned_r_disjoint: usize,
    pub pruned_g_disjoint: usize,
    pub terminated_by: Termination,
}

impl QueryOutcome {
    fn new() -> Self {
        Self {
            answer: false,
            expanded: 0,
            edges_relaxed: 0,
            pruned_b: 0,
            pruned_r_disjoint: 0,
            pruned_g_disjoint: 0,
            terminated_by: Termination::Exhausted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Prune {
    B,
    RDisjoint,
    GDisjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Verdict {
    Hit(Termination),
    Prune(Prune),
    Continue,
}

/// Judges a G payload: a hit when some cell lies inside `r`, continue when
/// some cell touches `r`, prune otherwise.
pub(crate) fn grid_verdict(grid: &HierarchicalGrid, cells: &CellSet, r: &Rect) -> Verdict {
    let mut touching = false;
    for layer in 0..grid.num_layers() {
        let first = grid.layer_offset(layer);
        let last = if layer + 1 < grid.num_layers() {
            grid.layer_offset(layer + 1) - 1
        } else {
            grid.total_cells()
        };
        if cells.range(first, last).next().is_none() {
            continue;
        }
        let Some((r0, r1, c0, c1)) = grid.candidate_span(layer, r) else {
            return Verdict::Prune(Prune::GDisjoint);
        };
        for row in r0..=r1 {
            let a = grid.cell_at(CellPos { layer, row, col: c0 }).0;
            let b = grid.cell_at(CellPos { layer, row, col: c1 }).0;
            for id in cells.range(a, b) {
                match rect_relation(r, &grid.cell_rect(CellId(id)).expect("valid cell")) {
                    Relation::Contains => return Verdict::Hit(Termination::GCellContained),
                    Relation::Overlaps => touching = true,
                    Relation::Disjoint => {}
                }
            }
        }
    }
    if touching {
        Verdict::Continue
    } else {
        Verdict::Prune(Prune::GDisjoint)
    }
}

fn points_hit(cond: &Condensation, c: ComponentId, r: &Rect) -> bool {
    cond.points_mbr(c).intersects(r) && cond.points(c).iter().any(|p| r.contains_point(*p))
}

fn verdict(s: &SpaGraph, c: ComponentId, r: &Rect) -> Verdict {
    if points_hit(&s.cond, c, r) {
        return Verdict::Hit(Termination::SpatialHit);
    }
    match &s.aux[c] {
        SpaAux::B(false) => Verdict::Prune(Prune::B),
        SpaAux::B(true) => Verdict::Continue,
        SpaAux::R(rmbr) => match rect_relation(r, rmbr) {
            Relation::Contains => Verdict::Hit(Termination::RContained),
            Relation::Disjoint => Verdict::Prune(Prune::RDisjoint),
            Relation::Overlaps => Verdict::Continue,
        },
        SpaAux::G(cells) => grid_verdict(&s.grid, cells, r),
    }
}

/// Shared depth-first discipline of the pruned query and the plain traversal
/// baseline.
pub(crate) fn guided_dfs(cond: &Condensation, start: ComponentId, mut judge: impl FnMut(ComponentId) -> Verdict) -> QueryOutcome {
    let mut out = QueryOutcome::new();
    let mut visited = vec![false; cond.num_slots()];
    let record = |v: Verdict, out: &mut QueryOutcome| -> bool {
        match v {
            Verdict::Hit(t) => {
                out.answer = true;
                out.terminated_by = t;
                return true;
            }
            Verdict::Prune(Prune::B) => out.pruned_b += 1,
            Verdict::Prune(Prune::RDisjoint) => out.pruned_r_disjoint += 1,
            Verdict::Prune(Prune::GDisjoint) => out.pruned_g_disjoint += 1,
            Verdict::Continue => {}
        }
        false
    };
    visited[start] = true;
    let first = judge(start);
    if record(first, &mut out) || first != Verdict::Continue {
        return out;
    }
    let mut stack = vec![start];
    let mut next = Vec::new();
    while let Some(c) = stack.pop() {
        out.expanded += 1;
        next.clear();
        for w in cond.out_neighbors(c) {
            out.edges_relaxed += 1;
            if visited[w] {
                continue;
            }
            visited[w] = true;
            let v = judge(w);
            if record(v, &mut out) {
                return out;
            }
            if v == Verdict::Continue {
                next.push(w);
            }
        }
        stack.extend(next.iter().rev());
    }
    out
}

pub(crate) fn check_query(s_vertices: usize, v: VertexId, r: &Rect) -> Result<()> {
    if v >= s_vertices {
        return Err(Error::UnknownVertex(v));
    }
    if r.is_empty() {
        return Err(Error::EmptyRect);
    }
    Ok(())
}

/// Whether `v` reaches (or is) a spatial vertex inside `r`.
pub fn range_reach(s: &SpaGraph, v: VertexId, r: &Rect) -> Result<QueryOutcome> {
    check_query(s.graph.vertex_count(), v, r)?;
    Ok(guided_dfs(&s.cond, s.cond.component_of(v), |c| verdict(s, c, r)))
}

/// Element-wise [`range_reach`], evaluated in parallel, order preserved.
pub fn range_reach_batch(s: &SpaGraph, queries: &[(VertexId, Rect)]) -> Vec<Result<QueryOutcome>> {
    queries.par_iter().map(|(v, r)| range_reach(s, *v, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, DirectedPropertyGraph};
    use crate::grid::SpatialPoint;
    use crate::index::{IndexConfig, Preset};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isolated_sink_is_false_without_expansion() {
        let (g, _) = parse_graph("n 2\n0 1\n", None, Rect::unit()).unwrap();
        let s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        let o = range_reach(&s, 1, &Rect::unit()).unwrap();
        assert!(!o.answer);
        assert_eq!(o.expanded, 0);
        assert_eq!(o.terminated_by, Termination::Exhausted);
    }

    #[test]
    fn own_point_counts() {
        let (g, _) = parse_graph("n 1\n", Some("0 0.5 0.5\n"), Rect::unit()).unwrap();
        let s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        let o = range_reach(&s, 0, &Rect::new(0.4, 0.4, 0.6, 0.6)).unwrap();
        assert_eq!(o.terminated_by, Termination::SpatialHit);
    }

    #[test]
    fn argument_errors() {
        let (g, _) = parse_graph("0 1\n", None, Rect::unit()).unwrap();
        let s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        assert!(matches!(range_reach(&s, 5, &Rect::unit()), Err(Error::UnknownVertex(5))));
        assert!(matches!(range_reach(&s, 0, &Rect::EMPTY), Err(Error::EmptyRect)));
        assert!(range_reach_batch(&s, &[]).is_empty());
    }

    #[test]
    fn grid_verdict_cases() {
        let grid = HierarchicalGrid::new(Rect::unit(), 4).unwrap();
        let cells = CellSet::from_ids(21, [14]);
        // G14 = [0.25, 0.5] x [0.75, 1]
        let v = |r: Rect| grid_verdict(&grid, &cells, &r);
        assert_eq!(v(Rect::new(0.2, 0.7, 0.55, 1.0)), Verdict::Hit(Termination::GCellContained));
        assert_eq!(v(Rect::new(0.3, 0.8, 0.4, 0.9)), Verdict::Continue);
        assert_eq!(v(Rect::new(0.5, 0.5, 0.6, 0.75)), Verdict::Continue);
        assert_eq!(v(Rect::new(0.6, 0.0, 0.9, 0.5)), Verdict::Prune(Prune::GDisjoint));
        let root = CellSet::from_ids(21, [21]);
        assert_eq!(grid_verdict(&grid, &root, &Rect::unit()), Verdict::Hit(Termination::GCellContained));
    }

    fn bfs_oracle(g: &DirectedPropertyGraph, v: usize, r: &Rect) -> bool {
        let reach = g.reachable_from(v);
        (0..g.vertex_count()).any(|u| reach[u] && g.spatial(u).is_some_and(|p| r.contains_point(p)))
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> DirectedPropertyGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DirectedPropertyGraph::new(n, Rect::unit());
        while g.edge_count() < m {
            g.add_edge(rng.random_range(0..n), rng.random_range(0..n)).unwrap();
        }
        for v in 0..n {
            if rng.random_bool(0.4) {
                g.set_spatial(v, SpatialPoint::new(rng.random(), rng.random())).unwrap();
            }
        }
        g
    }

    #[test]
    fn random_queries_match_bfs_for_every_preset() {
        let g = random_graph(150, 220, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let queries: Vec<(usize, Rect)> = (0..400)
            .map(|_| {
                let side = [0.01, 0.03, 0.1, 0.3][rng.random_range(0..4)];
                let x = rng.random_range(0.0..1.0 - side);
                let y = rng.random_range(0.0..1.0 - side);
                (rng.random_range(0..150), Rect::new(x, y, x + side, y + side))
            })
            .collect();
        let truth: Vec<bool> = queries.iter().map(|(v, r)| bfs_oracle(&g, *v, r)).collect();
        for p in Preset::ALL {
            let s = SpaGraph::build(g.clone(), p.config().with_resolution(16)).unwrap();
            let batch = range_reach_batch(&s, &queries);
            for (i, (v, r)) in queries.iter().enumerate() {
                let o = range_reach(&s, *v, r).unwrap();
                assert_eq!(o.answer, truth[i], "{p} query {i}");
                assert_eq!(o.answer, o.terminated_by != Termination::Exhausted);
                assert_eq!(batch[i].as_ref().unwrap(), &o);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn answers_match_bfs(
            seed in any::<u64>(),
            v in 0usize..60,
            (x, y, w, h) in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..0.5, 0.0f64..0.5),
            merge in 0u8..=4,
            grids in proptest::option::of(0usize..12),
        ) {
            let g = random_graph(60, 90, seed);
            let cfg = IndexConfig { max_rmbr: 0.5, max_reach_grids: grids, merge_count: merge, top_resolution: 8 };
            let s = SpaGraph::build(g.clone(), cfg).unwrap();
            let r = Rect::new(x, y, (x + w).min(1.0), (y + h).min(1.0));
            prop_assert_eq!(range_reach(&s, v, &r).unwrap().answer, bfs_oracle(&g, v, &r));
        }
    }
}
