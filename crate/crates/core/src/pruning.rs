//! Closed-form pruning probabilities for a uniformly placed query rectangle.
//!
//! A query of size `e × f` is placed with its minimum corner uniform over
//! `[0, W - e] × [0, H - f]` (coordinates relative to the space's minimum
//! corner), so the rectangle never leaves the space.

use crate::error::{Error, Result};
use crate::grid::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruningPower {
    /// Probability that the query misses the RMBR entirely.
    pub p_no_overlap: f64,
    /// Probability that the query contains the RMBR.
    pub p_lie_in: f64,
}

impl PruningPower {
    /// Overall R-vertex pruning power given the chance `p_true` that a vertex
    /// reaches anything spatial at all.
    pub fn combined(&self, p_true: f64) -> f64 {
        (self.p_no_overlap + self.p_lie_in) * p_true + (1.0 - p_true)
    }
}

/// Pruning power of a B-vertex: the chance it reaches nothing.
pub fn b_vertex_pruning_power(p_true: f64) -> f64 {
    1.0 - p_true
}

fn clamped_len(lo: f64, hi: f64) -> f64 {
    (hi - lo).max(0.0)
}

pub fn r_vertex_pruning_power(rmbr: &Rect, e: f64, f: f64, space: &Rect) -> Result<PruningPower> {
    let (w, h) = (space.width(), space.height());
    if !(e > 0.0 && f > 0.0 && e < w && f < h) {
        return Err(Error::DegenerateQuery { e, f, width: w, height: h });
    }
    if rmbr.is_empty() {
        return Err(Error::EmptyRect);
    }
    let (x1, x2) = (rmbr.min_x - space.min_x, rmbr.max_x - space.min_x);
    let (y1, y2) = (rmbr.min_y - space.min_y, rmbr.max_y - space.min_y);
    let area_i = (w - e) * (h - f);

    // placements whose rectangle touches the RMBR
    let overlap = clamped_len((x1 - e).max(0.0), x2.min(w - e)) * clamped_len((y1 - f).max(0.0), y2.min(h - f));
    let p_no_overlap = 1.0 - overlap / area_i;

    // placements whose rectangle swallows the RMBR; impossible unless the
    // query is larger on both axes
    let p_lie_in = if e > x2 - x1 && f > y2 - y1 {
        clamped_len((x2 - e).max(0.0), x1.min(w - e)) * clamped_len((y2 - f).max(0.0), y1.min(h - f)) / area_i
    } else {
        0.0
    };
    Ok(PruningPower { p_no_overlap, p_lie_in })
}
