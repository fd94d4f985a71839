//! Rectangles and the layered square grid used by ReachGrid payloads.
//!
//! Layer `L0` is the finest layer with `s × s` cells; every following layer
//! halves the per-side resolution until the single whole-space cell. Cell ids
//! are 1-based and globally unique: `L0` is numbered row-major `1..=s²`, the
//! next layer continues where the previous one stopped, and so on. Row 0 is
//! the row touching `min_y` (the "top" row in screen coordinates) and column 0
//! touches `min_x`.

use std::fmt;

use crate::error::GridError;

/// A point attribute of a spatial vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPoint {
    pub x: f64,
    pub y: f64,
}

impl SpatialPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Closed axis-aligned rectangle stored as min/max corners.
///
/// The empty rectangle has `min > max` on both axes and acts as the identity
/// of [`Rect::union`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

/// How a rectangle `r` sits relative to a query rectangle `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `r ⊆ q`.
    Contains,
    /// No common point (boundaries included).
    Disjoint,
    Overlaps,
}

impl Rect {
    pub const EMPTY: Rect = Rect {
        min_x: f64::INFINITY,
        min_y: f64::INFINITY,
        max_x: f64::NEG_INFINITY,
        max_y: f64::NEG_INFINITY,
    };

    /// Builds a rectangle from any two opposite corners.
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self {
            min_x: x1.min(x2),
            min_y: y1.min(y2),
            max_x: x1.max(x2),
            max_y: y1.max(y2),
        }
    }

    /// Maps the top-left / lower-right presentation (y growing downwards on
    /// screen, i.e. `top_left.y <= lower_right.y` in min/max terms) onto the
    /// canonical form. Any corner order is accepted.
    pub fn from_corners(top_left: SpatialPoint, lower_right: SpatialPoint) -> Self {
        Self::new(top_left.x, top_left.y, lower_right.x, lower_right.y)
    }

    pub fn unit() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn point(p: SpatialPoint) -> Self {
        Self {
            min_x: p.x,
            min_y: p.y,
            max_x: p.x,
            max_y: p.y,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min_x > self.max_x || self.min_y > self.max_y
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.max_x - self.min_x
        }
    }

    pub fn height(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.max_y - self.min_y
        }
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains_point(&self, p: SpatialPoint) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// `other ⊆ self`. An empty `other` is never reported as contained.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        !other.is_empty()
            && !self.is_empty()
            && self.min_x <= other.min_x
            && self.min_y <= other.min_y
            && other.max_x <= self.max_x
            && other.max_y <= self.max_y
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    /// Smallest rectangle covering both; `EMPTY` is the identity.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn union_point(&self, p: SpatialPoint) -> Rect {
        self.union(&Rect::point(p))
    }

    pub fn relation(&self, r: &Rect) -> Relation {
        rect_relation(self, r)
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "EMPTY")
        } else {
            write!(
                f,
                "[{}, {}] x [{}, {}]",
                self.min_x, self.max_x, self.min_y, self.max_y
            )
        }
    }
}

/// Relation of `r` with respect to the query rectangle `q`.
pub fn rect_relation(q: &Rect, r: &Rect) -> Relation {
    if r.is_empty() || !q.intersects(r) {
        Relation::Disjoint
    } else if q.contains_rect(r) {
        Relation::Contains
    } else {
        Relation::Overlaps
    }
}

/// Anything that can be folded into a bounding rectangle.
pub enum MbrItem<'a> {
    Rect(&'a Rect),
    Point(SpatialPoint),
    None,
}

impl<'a> From<&'a Rect> for MbrItem<'a> {
    fn from(r: &'a Rect) -> Self {
        MbrItem::Rect(r)
    }
}

impl From<SpatialPoint> for MbrItem<'_> {
    fn from(p: SpatialPoint) -> Self {
        MbrItem::Point(p)
    }
}

impl<'a, T: Into<MbrItem<'a>>> From<Option<T>> for MbrItem<'a> {
    fn from(o: Option<T>) -> Self {
        o.map_or(MbrItem::None, Into::into)
    }
}

pub fn mbr_union<'a>(a: &Rect, b: impl Into<MbrItem<'a>>) -> Rect {
    match b.into() {
        MbrItem::Rect(r) => a.union(r),
        MbrItem::Point(p) => a.union_point(p),
        MbrItem::None => *a,
    }
}

/// Globally unique 1-based cell id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellPos {
    pub layer: usize,
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalGrid {
    bounds: Rect,
    top_resolution: u32,
    /// First id of every layer, plus one trailing entry `total + 1`.
    offsets: Vec<u32>,
}

impl HierarchicalGrid {
    pub fn new(bounds: Rect, top_resolution: u32) -> Result<Self, GridError> {
        if top_resolution == 0 || !top_resolution.is_power_of_two() {
            return Err(GridError::Resolution(top_resolution));
        }
        if top_resolution > 1 << 12 {
            return Err(GridError::Resolution(top_resolution));
        }
        if bounds.is_empty()
            || !(bounds.width() > 0.0 && bounds.height() > 0.0)
            || !bounds.width().is_finite()
            || !bounds.height().is_finite()
        {
            return Err(GridError::Bounds(bounds));
        }
        let mut offsets = vec![1u32];
        let mut side = top_resolution;
        loop {
            let next = offsets.last().unwrap() + side * side;
            offsets.push(next);
            if side == 1 {
                break;
            }
            side /= 2;
        }
        Ok(Self {
            bounds,
            top_resolution,
            offsets,
        })
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn top_resolution(&self) -> u32 {
        self.top_resolution
    }

    /// Number of layers, `L0` through the single-cell layer.
    pub fn num_layers(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_cells(&self) -> u32 {
        self.offsets.last().unwrap() - 1
    }

    pub fn layer_side(&self, layer: usize) -> u32 {
        self.top_resolution >> layer
    }

    pub fn root(&self) -> CellId {
        CellId(self.total_cells())
    }

    pub fn is_valid(&self, c: CellId) -> bool {
        c.0 >= 1 && c.0 <= self.total_cells()
    }

    pub fn layer_of(&self, c: CellId) -> Result<usize, GridError> {
        if !self.is_valid(c) {
            return Err(GridError::InvalidCell(c.0));
        }
        Ok(self.offsets.partition_point(|&o| o <= c.0) - 1)
    }

    pub fn position(&self, c: CellId) -> Result<CellPos, GridError> {
        let layer = self.layer_of(c)?;
        let side = self.layer_side(layer);
        let local = c.0 - self.offsets[layer];
        Ok(CellPos {
            layer,
            row: local / side,
            col: local % side,
        })
    }

    pub fn cell_at(&self, pos: CellPos) -> CellId {
        debug_assert!(pos.layer < self.num_layers());
        let side = self.layer_side(pos.layer);
        debug_assert!(pos.row < side && pos.col < side);
        CellId(self.offsets[pos.layer] + pos.row * side + pos.col)
    }

    fn edge(&self, min: f64, max: f64, k: u32, side: u32) -> f64 {
        if k >= side {
            max
        } else {
            // k / side is an exact dyadic fraction, so coarse and fine layers
            // produce bit-identical shared edges.
            min + (max - min) * (k as f64 / side as f64)
        }
    }

    fn x_edge(&self, k: u32, side: u32) -> f64 {
        self.edge(self.bounds.min_x, self.bounds.max_x, k, side)
    }

    fn y_edge(&self, k: u32, side: u32) -> f64 {
        self.edge(self.bounds.min_y, self.bounds.max_y, k, side)
    }

    fn axis_index(&self, v: f64, side: u32, edge: impl Fn(u32) -> f64, min: f64, max: f64) -> u32 {
        let guess = ((v - min) / (max - min) * side as f64).floor();
        let mut k = if guess.is_nan() || guess < 0.0 {
            0
        } else {
            (guess as u64).min(side as u64 - 1) as u32
        };
        while k > 0 && v < edge(k) {
            k -= 1;
        }
        while k + 1 < side && v >= edge(k + 1) {
            k += 1;
        }
        k
    }

    /// `L0` cell containing `p`. Cells are half-open `[lo, hi)` except the last
    /// row and column, which are closed at the space boundary.
    pub fn cell_of_point(&self, p: SpatialPoint) -> Result<CellId, GridError> {
        if !p.x.is_finite() || !p.y.is_finite() || !self.bounds.contains_point(p) {
            return Err(GridError::OutOfBounds(p.x, p.y));
        }
        let side = self.top_resolution;
        let b = self.bounds;
        let col = self.axis_index(p.x, side, |k| self.x_edge(k, side), b.min_x, b.max_x);
        let row = self.axis_index(p.y, side, |k| self.y_edge(k, side), b.min_y, b.max_y);
        Ok(self.cell_at(CellPos { layer: 0, row, col }))
    }

    /// The four next-finer cells covering `c`, ascending; `None` for `L0`.
    pub fn children(&self, c: CellId) -> Result<Option<[CellId; 4]>, GridError> {
        let pos = self.position(c)?;
        if pos.layer == 0 {
            return Ok(None);
        }
        let layer = pos.layer - 1;
        let (r, col) = (pos.row * 2, pos.col * 2);
        Ok(Some([
            self.cell_at(CellPos { layer, row: r, col }),
            self.cell_at(CellPos { layer, row: r, col: col + 1 }),
            self.cell_at(CellPos { layer, row: r + 1, col }),
            self.cell_at(CellPos { layer, row: r + 1, col: col + 1 }),
        ]))
    }

    pub fn parent(&self, c: CellId) -> Result<Option<CellId>, GridError> {
        let pos = self.position(c)?;
        if pos.layer + 1 >= self.num_layers() {
            return Ok(None);
        }
        Ok(Some(self.cell_at(CellPos {
            layer: pos.layer + 1,
            row: pos.row / 2,
            col: pos.col / 2,
        })))
    }

    /// Ancestor of `c` at `layer` (`c` itself when already there).
    pub fn ancestor_at(&self, c: CellId, layer: usize) -> Result<CellId, GridError> {
        let pos = self.position(c)?;
        if layer < pos.layer || layer >= self.num_layers() {
            return Err(GridError::InvalidCell(c.0));
        }
        let shift = layer - pos.layer;
        Ok(self.cell_at(CellPos {
            layer,
            row: pos.row >> shift,
            col: pos.col >> shift,
        }))
    }

    pub fn cell_rect(&self, c: CellId) -> Result<Rect, GridError> {
        let pos = self.position(c)?;
        let side = self.layer_side(pos.layer);
        Ok(Rect {
            min_x: self.x_edge(pos.col, side),
            max_x: self.x_edge(pos.col + 1, side),
            min_y: self.y_edge(pos.row, side),
            max_y: self.y_edge(pos.row + 1, side),
        })
    }

    /// First id of `layer`.
    pub fn layer_offset(&self, layer: usize) -> u32 {
        self.offsets[layer]
    }

    /// Inclusive row and column ranges of the cells in `layer` that may touch
    /// `r`, padded by one cell so callers can settle edge cases exactly with
    /// [`HierarchicalGrid::cell_rect`]. `None` when `r` misses the space.
    pub fn candidate_span(&self, layer: usize, r: &Rect) -> Option<(u32, u32, u32, u32)> {
        if r.is_empty() || !r.intersects(&self.bounds) {
            return None;
        }
        let side = self.layer_side(layer);
        let b = self.bounds;
        let index = |v: f64, min: f64, max: f64| -> i64 {
            let t = ((v - min) / (max - min) * side as f64).floor();
            if t.is_nan() {
                0
            } else {
                t.clamp(-1.0, side as f64) as i64
            }
        };
        let clamp = |k: i64| k.clamp(0, side as i64 - 1) as u32;
        let c0 = clamp(index(r.min_x, b.min_x, b.max_x) - 1);
        let c1 = clamp(index(r.max_x, b.min_x, b.max_x) + 1);
        let r0 = clamp(index(r.min_y, b.min_y, b.max_y) - 1);
        let r1 = clamp(index(r.max_y, b.min_y, b.max_y) + 1);
        Some((r0, r1, c0, c1))
    }

    /// All `L0` cells underneath `c` (just `c` for an `L0` cell), ascending.
    pub fn l0_descendants(&self, c: CellId) -> Result<Vec<CellId>, GridError> {
        let pos = self.position(c)?;
        let span = 1u32 << pos.layer;
        let mut out = Vec::with_capacity((span * span) as usize);
        for row in pos.row * span..(pos.row + 1) * span {
            for col in pos.col * span..(pos.col + 1) * span {
                out.push(self.cell_at(CellPos { layer: 0, row, col }));
            }
        }
        Ok(out)
    }
}
