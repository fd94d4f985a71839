//! Edge insertion and deletion.
//!
//! Insertions grow payloads in place (the per-type maintenance routines) and
//! push changes to predecessors through a FIFO queue. Deletions recompute the
//! source from its remaining out-neighbours and propagate recomputation while
//! payloads keep changing. Insertions that close a cycle and deletions that
//! break one re-condense locally before propagating.

use std::collections::VecDeque;

use super::{compute_aux, dummy_rmbr, point_cells_of, settle, CellSet, NeighborView, SpaAux, SpaGraph};
use crate::condense::ComponentId;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::grid::HierarchicalGrid;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MaintenanceStats {
    /// Whether the graph changed (false for tolerated self-loops).
    pub applied: bool,
    /// Payload updates attempted, the first one included.
    pub updates: usize,
    /// Payload updates that changed something.
    pub changed: usize,
    /// Entries pushed onto the propagation queue beyond the seed.
    pub propagated: usize,
    /// Components folded into one by a new cycle.
    pub merged_components: usize,
    /// Components a broken cycle fell apart into.
    pub split_components: usize,
}

/// R-vertex update for one neighbour. Returns whether `aux` changed.
pub fn maintain_r_vertex(aux: &mut SpaAux, nb: &NeighborView<'_>, grid: &HierarchicalGrid) -> bool {
    let SpaAux::R(rmbr) = aux else {
        panic!("maintain_r_vertex on a non-R payload");
    };
    if matches!(nb.aux, SpaAux::B(true)) {
        *aux = SpaAux::B(true);
        return true;
    }
    let contribution = nb.rmbr_contribution(grid);
    if contribution.is_empty() || rmbr.contains_rect(&contribution) {
        return false;
    }
    *rmbr = rmbr.union(&contribution);
    true
}

/// G-vertex update for a neighbour that is neither an R-vertex nor a true
/// B-vertex. Returns whether cells were added.
pub fn maintain_g_vertex(aux: &mut SpaAux, nb: &NeighborView<'_>) -> bool {
    let SpaAux::G(cells) = aux else {
        panic!("maintain_g_vertex on a non-G payload");
    };
    debug_assert!(!matches!(nb.aux, SpaAux::R(_) | SpaAux::B(true)));
    let mut grew = false;
    if let SpaAux::G(other) = nb.aux {
        grew |= cells.union_with(other);
    }
    for &c in nb.point_cells {
        grew |= cells.insert(c);
    }
    grew
}

/// B-vertex update for one neighbour. Returns whether `aux` changed.
pub fn maintain_b_vertex(aux: &mut SpaAux, nb: &NeighborView<'_>, grid: &HierarchicalGrid) -> bool {
    let SpaAux::B(geob) = aux else {
        panic!("maintain_b_vertex on a non-B payload");
    };
    if *geob {
        return false;
    }
    let max_id = grid.total_cells();
    match nb.aux {
        SpaAux::B(true) => *aux = SpaAux::B(true),
        SpaAux::B(false) if nb.point_cells.is_empty() => return false,
        SpaAux::B(false) => *aux = SpaAux::G(CellSet::from_ids(max_id, nb.point_cells.iter().copied())),
        SpaAux::R(_) => *aux = SpaAux::R(nb.rmbr_contribution(grid)),
        SpaAux::G(cells) => {
            let mut cells = cells.clone();
            for &c in nb.point_cells {
                cells.insert(c);
            }
            *aux = SpaAux::G(cells);
        }
    }
    true
}

impl SpaGraph {
    /// Folds neighbour `y`'s contribution into `x`, then re-applies the
    /// thresholds. Returns whether `x` changed.
    fn absorb(&mut self, x: ComponentId, y: ComponentId) -> bool {
        let before = self.aux[x].clone();
        let mut aux = before.clone();
        let nb = self.view(y);
        match &mut aux {
            SpaAux::B(_) => {
                maintain_b_vertex(&mut aux, &nb, &self.grid);
            }
            SpaAux::R(_) => {
                maintain_r_vertex(&mut aux, &nb, &self.grid);
            }
            SpaAux::G(cells) => match nb.aux {
                SpaAux::B(true) => aux = SpaAux::B(true),
                SpaAux::R(_) => aux = SpaAux::R(dummy_rmbr(&self.grid, cells).union(&nb.rmbr_contribution(&self.grid))),
                _ => {
                    maintain_g_vertex(&mut aux, &nb);
                }
            },
        }
        // a degraded G keeps the dummy RMBR of the cells it already held; a
        // vertex that had nothing before takes the neighbour's RMBR as is
        let rmbr = || match &before {
            SpaAux::G(cells) => dummy_rmbr(&self.grid, cells).union(&nb.rmbr_contribution(&self.grid)),
            _ => nb.rmbr_contribution(&self.grid),
        };
        let aux = settle(aux, rmbr, &self.config, &self.grid, true);
        let changed = aux != before;
        self.aux[x] = aux;
        changed
    }

    fn recompute(&mut self, c: ComponentId) -> bool {
        let fresh = compute_aux(&self.views(c, None), &self.config, &self.grid, true);
        if fresh == self.aux[c] {
            false
        } else {
            self.aux[c] = fresh;
            true
        }
    }

    /// Recomputes every queued component, queueing predecessors of each one
    /// that changed.
    fn propagate_recompute(&mut self, mut queue: VecDeque<ComponentId>, stats: &mut MaintenanceStats) {
        while let Some(c) = queue.pop_front() {
            stats.updates += 1;
            if self.recompute(c) {
                stats.changed += 1;
                for p in self.cond.in_neighbors(c) {
                    queue.push_back(p);
                    stats.propagated += 1;
                }
            }
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.graph.contains_vertex(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Renumbers components canonically and carries the per-component tables
    /// along.
    fn compact(&mut self) {
        if let Some(map) = self.cond.compact() {
            let live = self.cond.num_slots();
            let mut aux = vec![SpaAux::B(false); live];
            let mut cells = vec![Vec::new(); live];
            for (old, new) in map.into_iter().enumerate() {
                if let Some(new) = new {
                    aux[new] = std::mem::replace(&mut self.aux[old], SpaAux::B(false));
                    cells[new] = std::mem::take(&mut self.point_cells[old]);
                }
            }
            self.aux = aux;
            self.point_cells = cells;
        }
    }

    /// Inserts `u -> v` and brings every payload up to date. Self-loops are
    /// tolerated and ignored.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<MaintenanceStats> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let mut stats = MaintenanceStats::default();
        if u == v {
            return Ok(stats);
        }
        if self.graph.has_edge(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        self.graph.add_edge(u, v)?;
        stats.applied = true;
        let (cu, cv) = (self.cond.component_of(u), self.cond.component_of(v));
        if cu == cv {
            return Ok(stats);
        }
        if self.cond.reaches(cv, cu) {
            let (keep, dead) = self.cond.merge_cycle(cv, cu, &self.graph);
            stats.merged_components = dead.len() + 1;
            for d in dead {
                self.aux[d] = SpaAux::B(false);
                self.point_cells[d].clear();
            }
            self.point_cells[keep] = point_cells_of(&self.grid, &self.cond, keep)?;
            // predecessors of the dead components now see the whole cycle, so
            // they are rechecked even if the surviving payload is unchanged
            stats.updates += 1;
            stats.changed += self.recompute(keep) as usize;
            let queue: VecDeque<ComponentId> = self.cond.in_neighbors(keep).collect();
            stats.propagated += queue.len();
            self.propagate_recompute(queue, &mut stats);
            self.compact();
            return Ok(stats);
        }
        self.cond.note_edge_added(cu, cv);
        let mut queue = VecDeque::from([(cu, cv)]);
        while let Some((x, y)) = queue.pop_front() {
            stats.updates += 1;
            if self.absorb(x, y) {
                stats.changed += 1;
                for p in self.cond.in_neighbors(x) {
                    queue.push_back((p, x));
                    stats.propagated += 1;
                }
            }
        }
        Ok(stats)
    }

    /// Removes `u -> v` and brings every payload up to date.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<MaintenanceStats> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.graph.has_edge(u, v) {
            return Err(Error::MissingEdge(u, v));
        }
        self.graph.remove_edge(u, v)?;
        let mut stats = MaintenanceStats {
            applied: true,
            ..Default::default()
        };
        let (cu, cv) = (self.cond.component_of(u), self.cond.component_of(v));
        if cu != cv {
            if self.cond.note_edge_removed(cu, cv) {
                self.propagate_recompute(VecDeque::from([cu]), &mut stats);
            }
            return Ok(stats);
        }
        let parts = self.cond.split(cu, &self.graph);
        if parts.len() == 1 {
            return Ok(stats);
        }
        stats.split_components = parts.len();
        self.aux.resize(self.cond.num_slots(), SpaAux::B(false));
        self.point_cells.resize(self.cond.num_slots(), Vec::new());
        for &p in &parts {
            self.point_cells[p] = point_cells_of(&self.grid, &self.cond, p)?;
        }
        let order: Vec<ComponentId> = self
            .cond
            .reverse_topological_order()
            .into_iter()
            .filter(|c| parts.contains(c))
            .collect();
        for &p in &order {
            stats.updates += 1;
            stats.changed += 1;
            self.aux[p] = compute_aux(&self.views(p, None), &self.config, &self.grid, true);
        }
        let queue: VecDeque<ComponentId> = parts
            .iter()
            .flat_map(|&p| self.cond.in_neighbors(p).collect::<Vec<_>>())
            .filter(|c| !parts.contains(c))
            .collect();
        stats.propagated += queue.len();
        self.propagate_recompute(queue, &mut stats);
        self.compact();
        Ok(stats)
    }

    /// A fresh build over the current graph with the same configuration.
    pub fn rebuild(&self) -> Result<SpaGraph> {
        SpaGraph::initialize(self.graph.clone(), self.grid.clone(), self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, DirectedPropertyGraph};
    use crate::grid::{Rect, SpatialPoint};
    use crate::index::{IndexConfig, Preset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid4() -> HierarchicalGrid {
        HierarchicalGrid::new(Rect::unit(), 4).unwrap()
    }

    fn view<'a>(aux: &'a SpaAux, cells: &'a [u32], mbr: Rect) -> NeighborView<'a> {
        NeighborView {
            aux,
            point_cells: cells,
            points_mbr: mbr,
            rmbr_hint: None,
        }
    }

    #[test]
    fn r_vertex_containment_short_circuits() {
        let g = grid4();
        let mut aux = SpaAux::R(Rect::new(0.1, 0.1, 0.9, 0.9));
        let nb = SpaAux::R(Rect::new(0.2, 0.2, 0.3, 0.3));
        assert!(!maintain_r_vertex(&mut aux, &view(&nb, &[], Rect::EMPTY), &g));
        assert_eq!(aux, SpaAux::R(Rect::new(0.1, 0.1, 0.9, 0.9)));
        let t = SpaAux::B(true);
        assert!(maintain_r_vertex(&mut aux, &view(&t, &[], Rect::EMPTY), &g));
        assert_eq!(aux, SpaAux::B(true));
    }

    #[test]
    fn r_vertex_grows_by_grid_dummy() {
        let g = grid4();
        let mut aux = SpaAux::R(Rect::new(0.0, 0.0, 0.1, 0.1));
        let nb = SpaAux::G(CellSet::from_ids(21, [12, 14]));
        assert!(maintain_r_vertex(&mut aux, &view(&nb, &[], Rect::EMPTY), &g));
        let dummy = g.cell_rect(crate::grid::CellId(12)).unwrap().union(&g.cell_rect(crate::grid::CellId(14)).unwrap());
        assert_eq!(aux, SpaAux::R(Rect::new(0.0, 0.0, 0.1, 0.1).union(&dummy)));
    }

    #[test]
    fn g_vertex_takes_the_union() {
        let mut aux = SpaAux::G(CellSet::from_ids(21, [14]));
        let nb = SpaAux::B(false);
        assert!(!maintain_g_vertex(&mut aux, &view(&nb, &[], Rect::EMPTY)));
        assert!(maintain_g_vertex(&mut aux, &view(&nb, &[12], Rect::EMPTY)));
        assert_eq!(aux, SpaAux::G(CellSet::from_ids(21, [12, 14])));
    }

    #[test]
    fn b_vertex_upgrades_per_neighbour_type() {
        let g = grid4();
        let mut t = SpaAux::B(true);
        assert!(!maintain_b_vertex(&mut t, &view(&SpaAux::B(false), &[3], Rect::EMPTY), &g));
        let mut f = SpaAux::B(false);
        assert!(!maintain_b_vertex(&mut f, &view(&SpaAux::B(false), &[], Rect::EMPTY), &g));
        let nb = SpaAux::G(CellSet::from_ids(21, [12, 14]));
        assert!(maintain_b_vertex(&mut f, &view(&nb, &[9], Rect::EMPTY), &g));
        assert_eq!(f, SpaAux::G(CellSet::from_ids(21, [9, 12, 14])));
        let mut f = SpaAux::B(false);
        let p = Rect::point(SpatialPoint::new(0.5, 0.5));
        let nb = SpaAux::R(Rect::new(0.1, 0.1, 0.2, 0.2));
        assert!(maintain_b_vertex(&mut f, &view(&nb, &[11], p), &g));
        assert_eq!(f, SpaAux::R(Rect::new(0.1, 0.1, 0.5, 0.5)));
    }

    #[test]
    fn deleting_the_only_path_to_a_point_clears_the_source() {
        let (g, _) = parse_graph("0 1\n", Some("1 0.5 0.5\n"), Rect::unit()).unwrap();
        let mut s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        assert!(s.aux(0).unwrap().reaches_any());
        s.delete_edge(0, 1).unwrap();
        assert_eq!(s.aux(0).unwrap(), &SpaAux::B(false));
        assert!(matches!(s.delete_edge(0, 1), Err(Error::MissingEdge(0, 1))));
    }

    #[test]
    fn edge_into_true_b_vertex_does_not_propagate() {
        let (g, _) = parse_graph("n 4\n0 1\n2 3\n", Some("1 0.5 0.5\n3 0.1 0.1\n"), Rect::unit()).unwrap();
        let cfg = IndexConfig {
            max_rmbr: 1.0,
            max_reach_grids: Some(0),
            merge_count: 0,
            top_resolution: 4,
        };
        let mut s = SpaGraph::build(g, IndexConfig { max_rmbr: 0.0001, ..cfg }).unwrap();
        s.add_edge(0, 3).unwrap();
        assert_eq!(s.aux(0).unwrap(), &SpaAux::B(true));
        let stats = s.add_edge(0, 2).unwrap();
        assert_eq!(stats.changed, 0);
        assert_eq!(stats.propagated, 0);
    }

    #[test]
    fn edge_to_an_empty_sink_changes_nothing() {
        let (g, _) = parse_graph("n 3\n0 1\n", Some("1 0.5 0.5\n"), Rect::unit()).unwrap();
        let mut s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        let before = s.clone();
        let stats = s.add_edge(0, 2).unwrap();
        assert_eq!(stats.changed, 0);
        assert_eq!(s.aux, before.aux);
    }

    #[test]
    fn unchanged_recompute_does_not_propagate() {
        // 0 -> 1 -> 3, 0 -> 2 -> 3, 3 spatial: dropping 1 -> 3 leaves 1 empty
        // but 0 still reaches 3 through 2
        let (g, _) = parse_graph("n 5\n4 0\n0 1\n0 2\n1 3\n2 3\n", Some("3 0.5 0.5\n"), Rect::unit()).unwrap();
        let mut s = SpaGraph::build(g, IndexConfig::default()).unwrap();
        let stats = s.delete_edge(0, 1).unwrap();
        assert_eq!(stats.updates, 1);
        assert_eq!(stats.propagated, 0);
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> DirectedPropertyGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DirectedPropertyGraph::new(n, Rect::unit());
        while g.edge_count() < m {
            g.add_edge(rng.random_range(0..n), rng.random_range(0..n)).unwrap();
        }
        for v in 0..n {
            if rng.random_bool(0.3) {
                g.set_spatial(v, SpatialPoint::new(rng.random(), rng.random())).unwrap();
            }
        }
        g
    }

    #[test]
    fn mt0_maintenance_is_structurally_a_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SpaGraph::build(random_graph(120, 150, 9), Preset::GeoMT0.config().with_resolution(16)).unwrap();
        for step in 0..300 {
            let u = rng.random_range(0..120);
            let v = rng.random_range(0..120);
            if s.graph().has_edge(u, v) {
                s.delete_edge(u, v).unwrap();
            } else {
                s.add_edge(u, v).unwrap();
            }
            if step % 10 == 0 {
                let r = s.rebuild().unwrap();
                assert_eq!(s.cond, r.cond, "step {step}");
                for c in 0..r.aux.len() {
                    assert_eq!(s.aux[c], r.aux[c], "step {step} component {c} {:?}", r.cond.members(c));
                }
                assert_eq!(s, r, "step {step}");
            }
        }
        assert_eq!(s, s.rebuild().unwrap());
    }
}
