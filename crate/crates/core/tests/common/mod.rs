//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangereach::graph::{load_graph, DirectedPropertyGraph, VertexId};
use rangereach::grid::{HierarchicalGrid, Rect, SpatialPoint};
use rangereach::index::IndexConfig;
use rangereach::workload::{assign_spatial, gen_queries, random_graph, Distribution, QuerySpec, SpatialAssignment};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

/// Vertex id of a fixture label `a`..`l`.
pub fn id(label: char) -> VertexId {
    (label as u8 - b'a') as usize
}

pub fn social_graph() -> DirectedPropertyGraph {
    let dir = data_dir();
    let (g, _) = load_graph(&dir.join("social.edges"), Some(&dir.join("social.spatial")), Rect::unit()).unwrap();
    g
}

pub fn social_config() -> IndexConfig {
    IndexConfig {
        max_rmbr: 0.8,
        max_reach_grids: Some(4),
        merge_count: 2,
        top_resolution: 4,
    }
}

/// Reflexive ground truth by breadth-first search.
pub fn oracle(g: &DirectedPropertyGraph, v: VertexId, r: &Rect) -> bool {
    g.reachable_from(v)
        .iter()
        .enumerate()
        .any(|(u, &seen)| seen && g.spatial(u).is_some_and(|p| r.contains_point(p)))
}

/// Points reachable from `v` along paths of at least one edge.
pub fn strictly_reachable_points(g: &DirectedPropertyGraph, v: VertexId) -> Vec<SpatialPoint> {
    let mut seen = vec![false; g.vertex_count()];
    for &w in g.out_neighbors(v) {
        if !seen[w] {
            for (u, r) in g.reachable_from(w).into_iter().enumerate() {
                seen[u] |= r;
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, s)| **s)
        .filter_map(|(u, _)| g.spatial(u))
        .collect()
}

pub fn l0_cells(grid: &HierarchicalGrid, pts: &[SpatialPoint]) -> BTreeSet<u32> {
    pts.iter().map(|p| grid.cell_of_point(*p).unwrap().0).collect()
}

pub fn mbr(pts: &[SpatialPoint]) -> Rect {
    pts.iter().fold(Rect::EMPTY, |acc, p| acc.union_point(*p))
}

#[derive(Debug, Clone)]
pub struct GraphCase {
    pub n: usize,
    pub avg_degree: f64,
    pub acyclic: bool,
    pub ratio: f64,
    pub distribution: Distribution,
    pub seed: u64,
}

impl GraphCase {
    pub fn graph(&self) -> DirectedPropertyGraph {
        let g = random_graph(self.n, self.avg_degree, self.acyclic, self.seed, Rect::unit()).unwrap();
        let spec = SpatialAssignment {
            distribution: self.distribution,
            ratio: self.ratio,
            seed: self.seed ^ 0xa5a5,
        };
        assign_spatial(g, &spec).unwrap()
    }
}

pub const SELECTIVITIES: [f64; 4] = [0.0001, 0.001, 0.01, 0.1];

/// Twenty graphs: every (size, degree, orientation) combination once, plus
/// two extra large graphs. Ratio and distribution rotate so that neither is
/// tied to orientation.
pub fn equivalence_suite() -> Vec<GraphCase> {
    let ratios = [0.2, 0.8];
    let dists: [Distribution; 3] = [
        Distribution::Uniform,
        "zipf".parse().unwrap(),
        "clustered".parse().unwrap(),
    ];
    let mut shapes = Vec::new();
    for n in [100, 500, 2000] {
        for avg_degree in [1.0, 2.3, 5.0] {
            for acyclic in [false, true] {
                shapes.push((n, avg_degree, acyclic));
            }
        }
    }
    shapes.push((2000, 2.3, false));
    shapes.push((2000, 2.3, true));
    shapes
        .into_iter()
        .enumerate()
        .map(|(i, (n, avg_degree, acyclic))| GraphCase {
            n,
            avg_degree,
            acyclic,
            ratio: ratios[(i + i / 2) % 2],
            distribution: dists[i % 3],
            seed: 1000 + i as u64,
        })
        .collect()
}

/// `total` queries split evenly over the four selectivities, tagged with
/// their selectivity.
pub fn mixed_queries(g: &DirectedPropertyGraph, total: usize, seed: u64) -> Vec<(f64, VertexId, Rect)> {
    let per = total / SELECTIVITIES.len();
    let mut out = Vec::with_capacity(total);
    for (k, &s) in SELECTIVITIES.iter().enumerate() {
        let qs = gen_queries(
            g,
            &QuerySpec {
                selectivity: s,
                count: per,
                seed: seed * 31 + k as u64,
            },
        )
        .unwrap();
        out.extend(qs.into_iter().map(|(v, r)| (s, v, r)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Add(VertexId, VertexId),
    Del(VertexId, VertexId),
}

/// A random applicable operation: half insertions of absent edges, half
/// deletions of present ones. `dag` keeps insertions pointing from lower to
/// higher id.
pub fn random_op(g: &DirectedPropertyGraph, rng: &mut ChaCha8Rng, dag: bool) -> Op {
    let n = g.vertex_count();
    if g.edge_count() > 0 && rng.random_bool(0.5) {
        let edges: Vec<(VertexId, VertexId)> = g.edges().collect();
        let (u, v) = edges[rng.random_range(0..edges.len())];
        return Op::Del(u, v);
    }
    loop {
        let (mut u, mut v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u == v {
            continue;
        }
        if dag && u > v {
            std::mem::swap(&mut u, &mut v);
        }
        if !g.has_edge(u, v) {
            return Op::Add(u, v);
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Acyclic random graph whose edges all point from lower to higher id.
pub fn forward_dag(n: usize, m: usize, ratio: f64, seed: u64) -> DirectedPropertyGraph {
    let mut r = rng(seed);
    let mut g = DirectedPropertyGraph::new(n, Rect::unit());
    while g.edge_count() < m {
        let (a, b) = (r.random_range(0..n), r.random_range(0..n));
        if a != b {
            g.add_edge(a.min(b), a.max(b)).unwrap();
        }
    }
    for v in 0..n {
        if r.random_bool(ratio) {
            g.set_spatial(v, SpatialPoint::new(r.random(), r.random())).unwrap();
        }
    }
    g
}
