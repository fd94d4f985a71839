//! The SPA-Graph: per-component spatial reachability payloads.
//!
//! Every component of the condensation carries one [`SpaAux`] describing the
//! spatial vertices reachable *through* it. A component's own points are not
//! part of its payload unless the component is a non-trivial SCC (then every
//! member reaches every other member). Predecessors pick the points up through
//! the neighbour's point cells instead.

pub mod cellset;
mod maintain;
mod snapshot;
mod storage;

use std::fmt;
use std::str::FromStr;

pub use cellset::CellSet;
pub use snapshot::{decode_snapshot, encode_snapshot, load_snapshot, save_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use maintain::{maintain_b_vertex, maintain_g_vertex, maintain_r_vertex, MaintenanceStats};
pub use storage::{KindTally, StorageReport};

use crate::condense::{ComponentId, Condensation};
use crate::error::{Error, Result};
use crate::graph::{DirectedPropertyGraph, VertexId};
use crate::grid::{CellId, CellPos, HierarchicalGrid, Rect};

pub const DEFAULT_RESOLUTION: u32 = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexConfig {
    /// Largest RMBR area kept, as a fraction of the space area.
    pub max_rmbr: f64,
    /// A G-vertex with at least this many cells becomes an R-vertex.
    /// `None` means unlimited.
    pub max_reach_grids: Option<usize>,
    /// Minimum number of reachable children that triggers a merge; 0 disables
    /// merging.
    pub merge_count: u8,
    pub top_resolution: u32,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Preset::GeoMT0.config()
    }
}

impl IndexConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_rmbr > 0.0 && self.max_rmbr <= 1.0) {
            return Err(Error::Config(format!("max_rmbr {} must lie in (0, 1]", self.max_rmbr)));
        }
        if self.merge_count > 4 {
            return Err(Error::Config(format!("merge_count {} must be at most 4", self.merge_count)));
        }
        if self.top_resolution == 0 || !self.top_resolution.is_power_of_two() {
            return Err(Error::Config(format!(
                "resolution {} must be a power of two",
                self.top_resolution
            )));
        }
        Ok(())
    }

    pub fn with_resolution(mut self, top_resolution: u32) -> Self {
        self.top_resolution = top_resolution;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    GeoMT0,
    GeoMT2,
    GeoMT3,
    GeoP,
    GeoRMBR,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::GeoMT0,
        Preset::GeoMT2,
        Preset::GeoMT3,
        Preset::GeoP,
        Preset::GeoRMBR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GeoMT0 => "GeoMT0",
            Preset::GeoMT2 => "GeoMT2",
            Preset::GeoMT3 => "GeoMT3",
            Preset::GeoP => "GeoP",
            Preset::GeoRMBR => "GeoRMBR",
        }
    }

    pub fn config(self) -> IndexConfig {
        let (max_reach_grids, merge_count) = match self {
            Preset::GeoMT0 => (None, 0),
            Preset::GeoMT2 => (None, 2),
            Preset::GeoMT3 => (None, 3),
            Preset::GeoP => (Some(200), 0),
            Preset::GeoRMBR => (Some(0), 0),
        };
        IndexConfig {
            max_rmbr: 1.0,
            max_reach_grids,
            merge_count,
            top_resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxKind {
    B,
    R,
    G,
}

/// Spatial reachability payload of one component.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaAux {
    /// GeoB bit: whether anything spatial is reachable.
    B(bool),
    /// Reachability minimum bounding rectangle.
    R(Rect),
    /// Reachable grid cells, possibly merged across layers.
    G(CellSet),
}

pub(crate) static B_FALSE: SpaAux = SpaAux::B(false);

impl SpaAux {
    pub fn kind(&self) -> AuxKind {
        match self {
            SpaAux::B(_) => AuxKind::B,
            SpaAux::R(_) => AuxKind::R,
            SpaAux::G(_) => AuxKind::G,
        }
    }

    /// Whether the payload records any reachable spatial vertex.
    pub fn reaches_any(&self) -> bool {
        match self {
            SpaAux::B(b) => *b,
            SpaAux::R(r) => !r.is_empty(),
            SpaAux::G(s) => !s.is_empty(),
        }
    }

    pub fn cells(&self) -> Option<&CellSet> {
        match self {
            SpaAux::G(s) => Some(s),
            _ => None,
        }
    }
}

/// What a component contributes to its predecessors.
#[derive(Debug, Clone, Copy)]
pub struct NeighborView<'a> {
    pub aux: &'a SpaAux,
    /// Distinct `L0` cells of the neighbour's own points, ascending.
    pub point_cells: &'a [u32],
    pub points_mbr: Rect,
    /// Exact RMBR of the neighbour, known during initialization only.
    pub rmbr_hint: Option<Rect>,
}

impl NeighborView<'_> {
    fn contributes(&self) -> bool {
        self.aux.reaches_any() || !self.point_cells.is_empty()
    }

    /// The neighbour's RMBR: stored, exact, or the dummy built from its cells.
    fn rmbr(&self, grid: &HierarchicalGrid) -> Rect {
        match self.aux {
            SpaAux::R(r) => *r,
            SpaAux::G(cells) => self.rmbr_hint.unwrap_or_else(|| dummy_rmbr(grid, cells)),
            SpaAux::B(_) => self.rmbr_hint.unwrap_or(Rect::EMPTY),
        }
    }

    /// RMBR contribution including the neighbour's own points.
    fn rmbr_contribution(&self, grid: &HierarchicalGrid) -> Rect {
        self.rmbr(grid).union(&self.points_mbr)
    }
}

/// Union of the cell rectangles; covers every point the cells stand for.
pub fn dummy_rmbr(grid: &HierarchicalGrid, cells: &CellSet) -> Rect {
    cells
        .iter()
        .fold(Rect::EMPTY, |acc, c| acc.union(&grid.cell_rect(CellId(c)).expect("valid cell")))
}

fn space_area(grid: &HierarchicalGrid) -> f64 {
    grid.bounds().area()
}

/// Applies the degradation thresholds and (optionally) merging.
pub(crate) fn settle(aux: SpaAux, rmbr: impl FnOnce() -> Rect, config: &IndexConfig, grid: &HierarchicalGrid, merge: bool) -> SpaAux {
    let aux = match aux {
        SpaAux::G(cells) => {
            let cells = if has_coarse(grid, &cells) { drop_covered(grid, &cells) } else { cells };
            if cells.is_empty() {
                return SpaAux::B(false);
            }
            match config.max_reach_grids {
                Some(limit) if cells.len() >= limit => SpaAux::R(rmbr()),
                _ if merge => SpaAux::G(merge_cells(grid, &cells, config.merge_count)),
                _ => SpaAux::G(cells),
            }
        }
        other => other,
    };
    match aux {
        SpaAux::R(r) if r.is_empty() => SpaAux::B(false),
        SpaAux::R(r) if r.area() > config.max_rmbr * space_area(grid) => SpaAux::B(true),
        other => other,
    }
}

/// Vertex typing from the current out-neighbour contributions.
pub(crate) fn compute_aux(
    views: &[NeighborView<'_>],
    config: &IndexConfig,
    grid: &HierarchicalGrid,
    merge: bool,
) -> SpaAux {
    if views.iter().any(|v| matches!(v.aux, SpaAux::B(true))) {
        return SpaAux::B(true);
    }
    if !views.iter().any(NeighborView::contributes) {
        return SpaAux::B(false);
    }
    let rmbr = || {
        views
            .iter()
            .fold(Rect::EMPTY, |acc, v| acc.union(&v.rmbr_contribution(grid)))
    };
    if views.iter().any(|v| v.aux.kind() == AuxKind::R) {
        return settle(SpaAux::R(rmbr()), rmbr, config, grid, merge);
    }
    let mut cells = CellSet::new(grid.total_cells());
    for v in views {
        if let SpaAux::G(s) = v.aux {
            cells.union_with(s);
        }
        if !v.point_cells.is_empty() {
            cells.union_with(&CellSet::from_ids(grid.total_cells(), v.point_cells.iter().copied()));
        }
    }
    settle(SpaAux::G(cells), rmbr, config, grid, merge)
}

fn ancestors(grid: &HierarchicalGrid, c: u32) -> impl Iterator<Item = u32> + '_ {
    std::iter::successors(grid.parent(CellId(c)).expect("valid cell"), move |p| {
        grid.parent(*p).expect("valid cell")
    })
    .map(|p| p.0)
}

fn has_coarse(grid: &HierarchicalGrid, cells: &CellSet) -> bool {
    grid.num_layers() > 1 && cells.range(grid.layer_offset(1), grid.total_cells()).next().is_some()
}

/// Removes cells already covered by a coarser member of the set.
pub fn drop_covered(grid: &HierarchicalGrid, cells: &CellSet) -> CellSet {
    if !has_coarse(grid, cells) {
        return cells.clone();
    }
    CellSet::from_ids(
        grid.total_cells(),
        cells.iter().filter(|&c| !ancestors(grid, c).any(|a| cells.contains(a))),
    )
}

/// Bottom-up merging: a parent replaces its covered descendants once at least
/// `merge_count` of its four children are present. `merge_count == 0` only
/// drops covered cells.
pub fn merge_cells(grid: &HierarchicalGrid, cells: &CellSet, merge_count: u8) -> CellSet {
    let mut set = drop_covered(grid, cells);
    if merge_count == 0 {
        return set;
    }
    for layer in 1..grid.num_layers() {
        let lo = grid.layer_offset(layer - 1);
        let hi = grid.layer_offset(layer) - 1;
        let mut parents: Vec<u32> = set
            .range(lo, hi)
            .map(|c| grid.parent(CellId(c)).expect("valid cell").expect("not root").0)
            .collect();
        parents.sort_unstable();
        let mut i = 0;
        while i < parents.len() {
            let p = parents[i];
            let mut j = i;
            while j < parents.len() && parents[j] == p {
                j += 1;
            }
            if j - i >= merge_count as usize {
                remove_descendants(grid, &mut set, p, layer);
                set.insert(p);
            }
            i = j;
        }
    }
    set
}

fn remove_descendants(grid: &HierarchicalGrid, set: &mut CellSet, p: u32, layer: usize) {
    let pos = grid.position(CellId(p)).expect("valid cell");
    for k in 0..layer {
        let span = 1u32 << (layer - k);
        let (r0, c0) = (pos.row * span, pos.col * span);
        for row in r0..r0 + span {
            let a = grid.cell_at(CellPos { layer: k, row, col: c0 }).0;
            let b = grid.cell_at(CellPos { layer: k, row, col: c0 + span - 1 }).0;
            let doomed: Vec<u32> = set.range(a, b).collect();
            for c in doomed {
                set.remove(c);
            }
        }
    }
}

/// Every `L0` cell underneath some member, ascending.
pub fn covered_l0_set(grid: &HierarchicalGrid, cells: &CellSet) -> Vec<u32> {
    let mut out: Vec<u32> = cells
        .iter()
        .flat_map(|c| grid.l0_descendants(CellId(c)).expect("valid cell"))
        .map(|c| c.0)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaGraph {
    pub(crate) graph: DirectedPropertyGraph,
    pub(crate) cond: Condensation,
    pub(crate) grid: HierarchicalGrid,
    pub(crate) config: IndexConfig,
    pub(crate) aux: Vec<SpaAux>,
    /// Distinct `L0` cells of each component's own points.
    pub(crate) point_cells: Vec<Vec<u32>>,
}

impl SpaGraph {
    /// Builds the index, creating the grid from the graph's bounds.
    pub fn build(graph: DirectedPropertyGraph, config: IndexConfig) -> Result<Self> {
        config.validate()?;
        let grid = HierarchicalGrid::new(graph.bounds(), config.top_resolution)?;
        Self::initialize(graph, grid, config)
    }

    /// Two-phase initialization: typing in reverse topological order, then
    /// cell merging.
    pub fn initialize(graph: DirectedPropertyGraph, grid: HierarchicalGrid, config: IndexConfig) -> Result<Self> {
        config.validate()?;
        if grid.bounds() != graph.bounds() {
            return Err(Error::Config(format!(
                "grid bounds {} differ from graph bounds {}",
                grid.bounds(),
                graph.bounds()
            )));
        }
        let cond = Condensation::new(&graph);
        let point_cells = (0..cond.num_slots())
            .map(|c| point_cells_of(&grid, &cond, c))
            .collect::<Result<Vec<_>>>()?;
        let mut s = SpaGraph {
            graph,
            cond,
            grid,
            config,
            aux: Vec::new(),
            point_cells,
        };
        s.aux = vec![SpaAux::B(false); s.cond.num_slots()];
        let mut exact = vec![Rect::EMPTY; s.cond.num_slots()];
        for c in s.cond.reverse_topological_order() {
            let views: Vec<NeighborView<'_>> = s.views(c, Some(&exact));
            let rmbr = views
                .iter()
                .fold(Rect::EMPTY, |acc, v| acc.union(&v.rmbr_contribution(&s.grid)));
            let aux = compute_aux(&views, &s.config, &s.grid, false);
            exact[c] = rmbr;
            s.aux[c] = aux;
        }
        if s.config.merge_count > 0 {
            for a in s.aux.iter_mut() {
                if let SpaAux::G(cells) = a {
                    *cells = merge_cells(&s.grid, cells, s.config.merge_count);
                }
            }
        }
        Ok(s)
    }

    /// Contributions reaching `c`: its out-neighbours, plus its own points
    /// when it is a non-trivial SCC.
    pub(crate) fn views<'a>(&'a self, c: ComponentId, exact: Option<&[Rect]>) -> Vec<NeighborView<'a>> {
        let mut views: Vec<NeighborView<'a>> = self
            .cond
            .out_neighbors(c)
            .map(|w| NeighborView {
                aux: &self.aux[w],
                point_cells: &self.point_cells[w],
                points_mbr: self.cond.points_mbr(w),
                rmbr_hint: exact.map(|e| e[w]),
            })
            .collect();
        if self.cond.members(c).len() > 1 && !self.point_cells[c].is_empty() {
            views.push(NeighborView {
                aux: &B_FALSE,
                point_cells: &self.point_cells[c],
                points_mbr: self.cond.points_mbr(c),
                rmbr_hint: None,
            });
        }
        views
    }

    pub(crate) fn view(&self, w: ComponentId) -> NeighborView<'_> {
        NeighborView {
            aux: &self.aux[w],
            point_cells: &self.point_cells[w],
            points_mbr: self.cond.points_mbr(w),
            rmbr_hint: None,
        }
    }

    /// Recomputes the payload of `c` from its current out-neighbours, the way
    /// maintenance does it (dummy RMBRs for G-neighbours).
    pub fn initialize_vertex(&self, c: ComponentId) -> SpaAux {
        compute_aux(&self.views(c, None), &self.config, &self.grid, true)
    }

    pub fn graph(&self) -> &DirectedPropertyGraph {
        &self.graph
    }

    pub fn condensation(&self) -> &Condensation {
        &self.cond
    }

    pub fn grid(&self) -> &HierarchicalGrid {
        &self.grid
    }

    pub fn config(&self) -> &IndexConfig {
        &self.config
    }

    pub fn component_of(&self, v: VertexId) -> ComponentId {
        self.cond.component_of(v)
    }

    pub fn component_aux(&self, c: ComponentId) -> &SpaAux {
        &self.aux[c]
    }

    /// Payload of the component holding `v`.
    pub fn aux(&self, v: VertexId) -> Result<&SpaAux> {
        if !self.graph.contains_vertex(v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(&self.aux[self.cond.component_of(v)])
    }

    pub fn point_cells(&self, c: ComponentId) -> &[u32] {
        &self.point_cells[c]
    }

    /// Live components and their payloads, ascending.
    pub fn payloads(&self) -> impl Iterator<Item = (ComponentId, &SpaAux)> + '_ {
        self.cond.components().map(|c| (c, &self.aux[c]))
    }

    /// Covered `L0` cells of `v`'s payload when it is a G-vertex.
    pub fn covered_l0_set(&self, v: VertexId) -> Result<Option<Vec<u32>>> {
        Ok(self.aux(v)?.cells().map(|s| covered_l0_set(&self.grid, s)))
    }

    pub fn storage_report(&self) -> StorageReport {
        StorageReport::of(self)
    }

    /// Reassembles an index from a decoded payload table.
    pub(crate) fn from_parts(graph: DirectedPropertyGraph, config: IndexConfig, aux: Vec<SpaAux>) -> Result<Self> {
        config.validate()?;
        let grid = HierarchicalGrid::new(graph.bounds(), config.top_resolution)?;
        let cond = Condensation::new(&graph);
        if aux.len() != cond.num_slots() {
            return Err(Error::Snapshot(format!(
                "{} payloads for {} components",
                aux.len(),
                cond.num_slots()
            )));
        }
        let point_cells = (0..cond.num_slots())
            .map(|c| point_cells_of(&grid, &cond, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaGraph {
            graph,
            cond,
            grid,
            config,
            aux,
            point_cells,
        })
    }
}

pub(crate) fn point_cells_of(grid: &HierarchicalGrid, cond: &Condensation, c: ComponentId) -> Result<Vec<u32>> {
    let mut cells = cond
        .points(c)
        .iter()
        .map(|p| grid.cell_of_point(*p).map(|id| id.0))
        .collect::<Result<Vec<_>, _>>()?;
    cells.sort_unstable();
    cells.dedup();
    Ok(cells)
}
