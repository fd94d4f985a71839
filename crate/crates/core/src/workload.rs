//! Synthetic graphs, spatial assignments and query workloads.
//!
//! All randomness comes from `ChaCha8Rng` seeded with the caller's seed, so a
//! (graph, assignment, query) spec triple reproduces the same workload on any
//! platform.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal, Zipf};

use crate::error::{Error, Result};
use crate::graph::{DirectedPropertyGraph, VertexId};
use crate::grid::{CellId, HierarchicalGrid, Rect, SpatialPoint};

pub const RNG_NAME: &str = "ChaCha8Rng";

pub const DEFAULT_ZIPF_EXPONENT: f64 = 1.0;
pub const DEFAULT_CLUSTERS: usize = 4;
pub const DEFAULT_CLUSTER_SPREAD: f64 = 0.05;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform,
    /// Cells of a `resolution × resolution` grid ranked by a seeded
    /// permutation; rank `k` is drawn with probability ∝ `k^-exponent`.
    Zipf { exponent: f64, resolution: u32 },
    /// `k` Gaussian clusters with uniform centres; `spread` is the standard
    /// deviation as a fraction of the space side.
    Clustered { k: usize, spread: f64 },
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Zipf { .. } => "zipf",
            Distribution::Clustered { .. } => "clustered",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `uniform`, `zipf` or `clustered`, with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "random" => Ok(Distribution::Uniform),
            "zipf" => Ok(Distribution::Zipf {
                exponent: DEFAULT_ZIPF_EXPONENT,
                resolution: crate::index::DEFAULT_RESOLUTION,
            }),
            "clustered" | "cluster" => Ok(Distribution::Clustered {
                k: DEFAULT_CLUSTERS,
                spread: DEFAULT_CLUSTER_SPREAD,
            }),
            _ => Err(Error::Config(format!("unknown distribution {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialAssignment {
    pub distribution: Distribution,
    pub ratio: f64,
    pub seed: u64,
}

/// Erdős–Rényi style digraph with `round(n · avg_degree)` distinct edges and
/// no self-loops. Acyclic graphs orient every edge along a random vertex
/// permutation.
pub fn random_graph(n: usize, avg_degree: f64, acyclic: bool, seed: u64, bounds: Rect) -> Result<DirectedPropertyGraph> {
    if !(avg_degree >= 0.0 && avg_degree.is_finite()) {
        return Err(Error::Config(format!("invalid average degree {avg_degree}")));
    }
    let mut g = DirectedPropertyGraph::new(n, bounds);
    let possible = if acyclic { n * n.saturating_sub(1) / 2 } else { n * n.saturating_sub(1) };
    let m = ((n as f64 * avg_degree).round() as usize).min(possible);
    let mut rng = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    while g.edge_count() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let (u, v) = if acyclic && position[a] > position[b] { (b, a) } else { (a, b) };
        g.add_edge(u, v)?;
    }
    Ok(g)
}

fn uniform_in(rng: &mut ChaCha8Rng, r: &Rect) -> SpatialPoint {
    SpatialPoint::new(
        r.min_x + rng.random::<f64>() * r.width(),
        r.min_y + rng.random::<f64>() * r.height(),
    )
}

/// Centres of the clustered distribution, uniform over `bounds` and drawn
/// from their own stream so they do not depend on the vertex sample.
pub fn cluster_centres(bounds: &Rect, k: usize, seed: u64) -> Vec<SpatialPoint> {
    let mut rng = rng(seed ^ 0xc105_7e25);
    (0..k).map(|_| uniform_in(&mut rng, bounds)).collect()
}

/// Replaces the spatial attributes of `g`: exactly `⌊ratio · n⌋` vertices,
/// chosen uniformly, receive a point drawn from the distribution.
pub fn assign_spatial(mut g: DirectedPropertyGraph, spec: &SpatialAssignment) -> Result<DirectedPropertyGraph> {
    if !(0.0..=1.0).contains(&spec.ratio) {
        return Err(Error::Config(format!("spatial ratio {} must lie in [0, 1]", spec.ratio)));
    }
    let n = g.vertex_count();
    let count = ((spec.ratio * n as f64).floor() as usize).min(n);
    let bounds = g.bounds();
    let mut rng = rng(spec.seed);
    let mut chosen = index::sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();
    g.clear_spatial();
    let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> SpatialPoint> = match spec.distribution {
        Distribution::Uniform => Box::new(move |rng| uniform_in(rng, &bounds)),
        Distribution::Zipf { exponent, resolution } => {
            let grid = HierarchicalGrid::new(bounds, resolution)?;
            let cells = resolution as u64 * resolution as u64;
            let zipf = Zipf::new(cells as f64, exponent)
                .map_err(|e| Error::Config(format!("zipf parameters: {e}")))?;
            let mut ranked: Vec<u32> = (1..=cells as u32).collect();
            ranked.shuffle(&mut rng);
            Box::new(move |rng| {
                let rank = (zipf.sample(rng) as usize).clamp(1, ranked.len());
                let r = grid.cell_rect(CellId(ranked[rank - 1])).expect("valid cell");
                uniform_in(rng, &r)
            })
        }
        Distribution::Clustered { k, spread } => {
            if k == 0 {
                return Err(Error::Config("cluster count must be positive".into()));
            }
            if !(spread > 0.0 && spread.is_finite()) {
                return Err(Error::Config(format!("cluster spread {spread} must be positive")));
            }
            let centres = cluster_centres(&bounds, k, spec.seed);
            let nx = Normal::new(0.0, spread * bounds.width()).expect("positive deviation");
            let ny = Normal::new(0.0, spread * bounds.height()).expect("positive deviation");
            Box::new(move |rng| {
                let c = centres[rng.random_range(0..centres.len())];
                loop {
                    let p = SpatialPoint::new(c.x + nx.sample(rng), c.y + ny.sample(rng));
                    if bounds.contains_point(p) {
                        return p;
                    }
                }
            })
        }
    };
    for v in chosen {
        let p = draw(&mut rng);
        g.set_spatial(v, p)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySpec {
    /// Query area as a fraction of the space area.
    pub selectivity: f64,
    pub count: usize,
    pub seed: u64,
}

/// Size of a query rectangle of the given selectivity: the space scaled by
/// `√selectivity` on both axes (a square on a square space).
pub fn query_size(bounds: &Rect, selectivity: f64) -> (f64, f64) {
    let k = selectivity.sqrt();
    (k * bounds.width(), k * bounds.height())
}

/// `count` (vertex, rectangle) pairs; vertices uniform, rectangles placed
/// uniformly and entirely inside the space.
pub fn gen_queries(g: &DirectedPropertyGraph, spec: &QuerySpec) -> Result<Vec<(VertexId, Rect)>> {
    if !(spec.selectivity > 0.0 && spec.selectivity < 1.0) {
        return Err(Error::Config(format!(
            "selectivity {} must lie strictly between 0 and 1",
            spec.selectivity
        )));
    }
    if spec.count > 0 && g.vertex_count() == 0 {
        return Err(Error::Config("cannot draw query vertices from an empty graph".into()));
    }
    let b = g.bounds();
    let (e, f) = query_size(&b, spec.selectivity);
    let mut rng = rng(spec.seed);
    Ok((0..spec.count)
        .map(|_| {
            let v = rng.random_range(0..g.vertex_count());
            let x = b.min_x + rng.random::<f64>() * (b.width() - e);
            let y = b.min_y + rng.random::<f64>() * (b.height() - f);
            (v, Rect::new(x, y, x + e, y + f))
        })
        .collect())
}

/// One query per line: `vertex min_x min_y max_x max_y`.
pub fn write_queries<W: Write>(mut w: W, queries: &[(VertexId, Rect)]) -> std::io::Result<()> {
    for (v, r) in queries {
        writeln!(w, "{v} {:?} {:?} {:?} {:?}", r.min_x, r.min_y, r.max_x, r.max_y)?;
    }
    Ok(())
}

pub fn parse_queries(text: &str) -> Result<Vec<(VertexId, Rect)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(bad("expected `vertex min_x min_y max_x max_y`"));
        }
        let v: VertexId = fields[0].parse().map_err(|_| bad("invalid vertex id"))?;
        let mut c = [0.0f64; 4];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = fields[k + 1].parse().map_err(|_| bad("invalid coordinate"))?;
            if !slot.is_finite() {
                return Err(bad("coordinate must be finite"));
            }
        }
        out.push((v, Rect::new(c[0], c[1], c[2], c[3])));
    }
    Ok(out)
}

pub fn read_queries(path: &Path) -> Result<Vec<(VertexId, Rect)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&text)
}

/// Reads queries line by line from any reader.
pub fn load_queries<R: BufRead>(mut r: R) -> Result<Vec<(VertexId, Rect)>> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::io("<input>", e))?;
    parse_queries(&text)
}
