//! Spatial index plus reachability index: range-filter the spatial vertices,
//! then test reachability to each candidate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::condense::{condense, ComponentId, Condensation};
use crate::error::Result;
use crate::graph::{DirectedPropertyGraph, VertexId};
use crate::grid::{Rect, SpatialPoint};
use crate::query::check_query;

/// Uniform bucket grid over the spatial vertices.
#[derive(Debug, Clone)]
pub struct SpatialIndexGrid {
    bounds: Rect,
    side: usize,
    buckets: Vec<Vec<(VertexId, SpatialPoint)>>,
}

impl SpatialIndexGrid {
    pub fn new(g: &DirectedPropertyGraph, side: usize) -> Self {
        let side = side.max(1);
        let mut idx = SpatialIndexGrid {
            bounds: g.bounds(),
            side,
            buckets: vec![Vec::new(); side * side],
        };
        for (v, p) in g.spatial_vertices() {
            let b = idx.bucket(p.x, p.y);
            idx.buckets[b.1 * side + b.0].push((v, p));
        }
        idx
    }

    fn axis(&self, v: f64, min: f64, max: f64) -> usize {
        let t = ((v - min) / (max - min) * self.side as f64).floor();
        if t.is_nan() || t < 0.0 {
            0
        } else {
            (t as usize).min(self.side - 1)
        }
    }

    fn bucket(&self, x: f64, y: f64) -> (usize, usize) {
        let b = self.bounds;
        (self.axis(x, b.min_x, b.max_x), self.axis(y, b.min_y, b.max_y))
    }

    /// Spatial vertices inside `r`, ascending by id.
    pub fn range(&self, r: &Rect) -> Vec<VertexId> {
        if r.is_empty() || !r.intersects(&self.bounds) {
            return Vec::new();
        }
        // buckets are only an accelerator; the exact test happens per point,
        // so a one-bucket margin absorbs any rounding at bucket edges
        let (c0, r0) = self.bucket(r.min_x, r.min_y);
        let (c1, r1) = self.bucket(r.max_x, r.max_y);
        let (c0, r0) = (c0.saturating_sub(1), r0.saturating_sub(1));
        let (c1, r1) = ((c1 + 1).min(self.side - 1), (r1 + 1).min(self.side - 1));
        let mut out = Vec::new();
        for row in r0..=r1 {
            for col in c0..=c1 {
                out.extend(
                    self.buckets[row * self.side + col]
                        .iter()
                        .filter(|(_, p)| r.contains_point(*p))
                        .map(|(v, _)| *v),
                );
            }
        }
        out.sort_unstable();
        out
    }

    pub fn bytes(&self) -> usize {
        self.buckets.iter().map(|b| b.len() * 24).sum::<usize>() + self.buckets.len() * 8
    }
}

/// Randomized interval labels over the condensation DAG: `k` random
/// depth-first traversals, each giving every component the interval
/// `[lowest post-order rank below it, its own rank]`. Containment is necessary
/// for reachability; inconclusive pairs fall back to a label-pruned search.
#[derive(Debug, Clone)]
pub struct ReachLabels {
    out: Vec<Vec<ComponentId>>,
    k: usize,
    labels: Vec<(u32, u32)>,
}

pub struct ReachScratch {
    stamp: Vec<u32>,
    generation: u32,
    stack: Vec<ComponentId>,
}

impl ReachScratch {
    pub fn new(slots: usize) -> Self {
        Self {
            stamp: vec![0; slots],
            generation: 0,
            stack: Vec::new(),
        }
    }
}

impl ReachLabels {
    pub fn new(cond: &Condensation, k: usize, seed: u64) -> Self {
        let slots = cond.num_slots();
        let out: Vec<Vec<ComponentId>> = (0..slots).map(|c| cond.out_neighbors(c).collect()).collect();
        let mut has_parent = vec![false; slots];
        for succ in &out {
            for &w in succ {
                has_parent[w] = true;
            }
        }
        let mut roots: Vec<ComponentId> = cond.components().filter(|&c| !has_parent[c]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels = vec![(0u32, 0u32); slots * k];
        for i in 0..k {
            roots.shuffle(&mut rng);
            let mut done = vec![false; slots];
            let mut rank = 0u32;
            let mut calls: Vec<(ComponentId, Vec<ComponentId>, usize, u32)> = Vec::new();
            for &root in &roots {
                if done[root] {
                    continue;
                }
                done[root] = true;
                let mut kids = out[root].clone();
                kids.shuffle(&mut rng);
                calls.push((root, kids, 0, u32::MAX));
                while let Some(frame) = calls.last_mut() {
                    if frame.2 < frame.1.len() {
                        let w = frame.1[frame.2];
                        frame.2 += 1;
                        if done[w] {
                            frame.3 = frame.3.min(labels[w * k + i].0);
                        } else {
                            done[w] = true;
                            let mut kids = out[w].clone();
                            kids.shuffle(&mut rng);
                            calls.push((w, kids, 0, u32::MAX));
                        }
                    } else {
                        let (c, _, _, low) = calls.pop().unwrap();
                        rank += 1;
                        labels[c * k + i] = (low.min(rank), rank);
                        if let Some(parent) = calls.last_mut() {
                            parent.3 = parent.3.min(labels[c * k + i].0);
                        }
                    }
                }
            }
        }
        ReachLabels { out, k, labels }
    }

    fn label(&self, c: ComponentId) -> &[(u32, u32)] {
        &self.labels[c * self.k..(c + 1) * self.k]
    }

    fn may_reach(&self, a: ComponentId, b: ComponentId) -> bool {
        self.label(a)
            .iter()
            .zip(self.label(b))
            .all(|(la, lb)| la.0 <= lb.0 && lb.1 <= la.1)
    }

    /// Exact `a ⇝ b` (reflexive).
    pub fn reaches(&self, a: ComponentId, b: ComponentId, scratch: &mut ReachScratch) -> bool {
        if a == b {
            return true;
        }
        if !self.may_reach(a, b) {
            return false;
        }
        scratch.generation = scratch.generation.wrapping_add(1);
        if scratch.generation == 0 {
            scratch.stamp.fill(0);
            scratch.generation = 1;
        }
        let generation = scratch.generation;
        scratch.stack.clear();
        scratch.stack.push(a);
        scratch.stamp[a] = generation;
        while let Some(c) = scratch.stack.pop() {
            for &w in &self.out[c] {
                if w == b {
                    return true;
                }
                if scratch.stamp[w] != generation && self.may_reach(w, b) {
                    scratch.stamp[w] = generation;
                    scratch.stack.push(w);
                }
            }
        }
        false
    }

    pub fn bytes(&self) -> usize {
        self.labels.len() * 8
    }
}

#[derive(Debug, Clone)]
pub struct SpaReach {
    cond: Condensation,
    spatial: SpatialIndexGrid,
    labels: ReachLabels,
}

pub const LABEL_TRAVERSALS: usize = 3;
const LABEL_SEED: u64 = 0x5eed_1abe1;

pub fn build_spareach(g: &DirectedPropertyGraph, bucket_resolution: usize) -> SpaReach {
    let cond = condense(g);
    let labels = ReachLabels::new(&cond, LABEL_TRAVERSALS, LABEL_SEED);
    SpaReach {
        spatial: SpatialIndexGrid::new(g, bucket_resolution),
        labels,
        cond,
    }
}

impl SpaReach {
    pub fn spatial_index(&self) -> &SpatialIndexGrid {
        &self.spatial
    }

    pub fn labels(&self) -> &ReachLabels {
        &self.labels
    }

    pub fn scratch(&self) -> ReachScratch {
        ReachScratch::new(self.cond.num_slots())
    }

    pub fn bytes(&self) -> usize {
        self.spatial.bytes() + self.labels.bytes()
    }
}

/// Range-filters the spatial vertices, then tests `v ⇝ u` for each candidate
/// `u` in ascending id order, stopping at the first success. Returns the
/// answer and the number of reachability tests made.
pub fn spareach_query(idx: &SpaReach, v: VertexId, r: &Rect) -> Result<(bool, usize)> {
    check_query(idx.cond.component_assignment().len(), v, r)?;
    let from = idx.cond.component_of(v);
    let mut scratch = idx.scratch();
    let mut checks = 0;
    for u in idx.spatial.range(r) {
        checks += 1;
        if idx.labels.reaches(from, idx.cond.component_of(u), &mut scratch) {
            return Ok((true, checks));
        }
    }
    Ok((false, checks))
}
