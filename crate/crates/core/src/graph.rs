//! Directed property graph with optional point attributes, plus the
//! edge-list / point-list text formats.
//!
//! Edge file: one `<src> <dst>` pair of decimal integers per line, `#` starts
//! a comment line. An optional first data line `n <count>` declares the vertex
//! count; ids are then used verbatim and must be below `count`. Without it,
//! labels are densified in order of first appearance.
//!
//! Point file: `<vertex> <x> <y>` per line, same comment rule. Labels follow
//! the edge file's mapping; a label never seen in the edge file becomes a new
//! isolated vertex.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Rect, SpatialPoint};

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectedPropertyGraph {
    bounds: Rect,
    out_adj: Vec<Vec<VertexId>>,
    in_adj: Vec<Vec<VertexId>>,
    spatial: Vec<Option<SpatialPoint>>,
    edge_count: usize,
}

/// What the loader silently dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

impl DirectedPropertyGraph {
    pub fn new(n: usize, bounds: Rect) -> Self {
        Self {
            bounds,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            spatial: vec![None; n],
            edge_count: 0,
        }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn vertex_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn spatial_count(&self) -> usize {
        self.spatial.iter().filter(|p| p.is_some()).count()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.spatial.push(None);
        self.out_adj.len() - 1
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v < self.vertex_count()
    }

    fn check(&self, v: VertexId) -> Result<()> {
        if self.contains_vertex(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Inserts `u -> v`. Returns `false` for self-loops and existing edges,
    /// neither of which can change a reachability answer.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(false);
        }
        let out = &mut self.out_adj[u];
        match out.binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                out.insert(pos, v);
                let inn = &mut self.in_adj[v];
                let pos = inn.binary_search(&u).unwrap_err();
                inn.insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        match self.out_adj[u].binary_search(&v) {
            Ok(pos) => {
                self.out_adj[u].remove(pos);
                let pos = self.in_adj[v].binary_search(&u).unwrap();
                self.in_adj[v].remove(pos);
                self.edge_count -= 1;
                Ok(true)
            }
            Err(_) => Ok(false),
        }
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.contains_vertex(u) && self.out_adj[u].binary_search(&v).is_ok()
    }

    pub fn set_spatial(&mut self, v: VertexId, p: SpatialPoint) -> Result<()> {
        self.check(v)?;
        if !p.x.is_finite() || !p.y.is_finite() || !self.bounds.contains_point(p) {
            return Err(Error::PointOutOfBounds { vertex: v, x: p.x, y: p.y });
        }
        self.spatial[v] = Some(p);
        Ok(())
    }

    pub fn clear_spatial(&mut self) {
        self.spatial.iter_mut().for_each(|p| *p = None);
    }

    pub fn spatial(&self, v: VertexId) -> Option<SpatialPoint> {
        self.spatial[v]
    }

    /// Sorted ascending.
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out_adj[v]
    }

    /// Sorted ascending.
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_adj[v]
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn spatial_vertices(&self) -> impl Iterator<Item = (VertexId, SpatialPoint)> + '_ {
        self.spatial
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v, p)))
    }

    /// Vertices reachable from `v`, including `v` itself. Plain BFS, used by
    /// tests and verification code.
    pub fn reachable_from(&self, v: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = std::collections::VecDeque::from([v]);
        seen[v] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &self.out_adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn write_edges<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n {}", self.vertex_count())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn write_spatial<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (v, p) in self.spatial_vertices() {
            writeln!(w, "{v} {} {}", p.x, p.y)?;
        }
        Ok(())
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(line: usize, field: Option<&str>, what: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{field}`"),
    })
}

struct Labels {
    declared: Option<usize>,
    map: HashMap<u64, VertexId>,
    next: usize,
}

impl Labels {
    fn resolve(&mut self, line: usize, label: u64) -> Result<VertexId> {
        match self.declared {
            Some(n) => {
                if label >= n as u64 {
                    Err(Error::VertexOutOfRange { line, id: label, n })
                } else {
                    Ok(label as usize)
                }
            }
            None => Ok(*self.map.entry(label).or_insert_with(|| {
                self.next += 1;
                self.next - 1
            })),
        }
    }
}

/// Parses the edge and point formats from memory.
pub fn parse_graph(
    edges: &str,
    spatial: Option<&str>,
    bounds: Rect,
) -> Result<(DirectedPropertyGraph, LoadReport)> {
    let mut labels = Labels {
        declared: None,
        map: HashMap::new(),
        next: 0,
    };
    let mut pairs = Vec::new();
    for (idx, (line, text)) in data_lines(edges).enumerate() {
        let mut fields = text.split_whitespace();
        if idx == 0 && text.starts_with('n') {
            fields.next();
            labels.declared = Some(parse_field(line, fields.next(), "vertex count")?);
            if fields.next().is_some() {
                return Err(Error::Parse { line, msg: "trailing fields".into() });
            }
            continue;
        }
        let src: u64 = parse_field(line, fields.next(), "source id")?;
        let dst: u64 = parse_field(line, fields.next(), "target id")?;
        if fields.next().is_some() {
            return Err(Error::Parse { line, msg: "trailing fields".into() });
        }
        let u = labels.resolve(line, src)?;
        let v = labels.resolve(line, dst)?;
        pairs.push((u, v));
    }
    let mut points = Vec::new();
    if let Some(text) = spatial {
        for (line, text) in data_lines(text) {
            let mut fields = text.split_whitespace();
            let label: u64 = parse_field(line, fields.next(), "vertex id")?;
            let x: f64 = parse_field(line, fields.next(), "x coordinate")?;
            let y: f64 = parse_field(line, fields.next(), "y coordinate")?;
            if fields.next().is_some() {
                return Err(Error::Parse { line, msg: "trailing fields".into() });
            }
            let v = labels.resolve(line, label)?;
            points.push((v, SpatialPoint::new(x, y)));
        }
    }
    let n = labels.declared.unwrap_or(labels.next);
    let mut g = DirectedPropertyGraph::new(n, bounds);
    let mut report = LoadReport::default();
    for (u, v) in pairs {
        if u == v {
            report.self_loops += 1;
        } else if !g.add_edge(u, v)? {
            report.duplicate_edges += 1;
        }
    }
    for (v, p) in points {
        g.set_spatial(v, p)?;
    }
    Ok((g, report))
}

pub fn load_graph(
    edge_file: &Path,
    spatial_file: Option<&Path>,
    bounds: Rect,
) -> Result<(DirectedPropertyGraph, LoadReport)> {
    let edges = fs::read_to_string(edge_file).map_err(|e| Error::io(edge_file, e))?;
    let spatial = spatial_file
        .map(|p| fs::read_to_string(p).map_err(|e| Error::io(p, e)))
        .transpose()?;
    parse_graph(&edges, spatial.as_deref(), bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_edge_file_without_points() {
        let (g, report) = parse_graph("0 1\n1 2\n", None, Rect::unit()).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.spatial_count(), 0);
        assert_eq!(report, LoadReport::default());
    }

    #[test]
    fn labels_are_densified_by_first_appearance() {
        let (g, _) = parse_graph("# c\n10 7\n7 42\n", Some("42 0.5 0.5\n99 0.1 0.1\n"), Rect::unit()).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2));
        assert_eq!(g.spatial(2), Some(SpatialPoint::new(0.5, 0.5)));
        assert_eq!(g.spatial(3), Some(SpatialPoint::new(0.1, 0.1)));
    }

    #[test]
    fn duplicates_and_self_loops_are_counted_and_dropped() {
        let (g, report) = parse_graph("0 1\n0 1\n2 2\n1 0\n", None, Rect::unit()).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(report.duplicate_edges, 1);
        assert_eq!(report.self_loops, 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_graph("0 1\n# x\n1 x\n", None, Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_graph("0\n", None, Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_graph("n 3\n0 1\n1 3\n", None, Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::VertexOutOfRange { line: 3, id: 3, n: 3 }));
        let err = parse_graph("0 1\n", Some("0 1.5 0.2\n"), Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::PointOutOfBounds { vertex: 0, .. }));
        let err = parse_graph("0 1\n", Some("0 0.5\n"), Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn declared_count_keeps_isolated_vertices() {
        let (g, _) = parse_graph("n 5\n0 1\n", None, Rect::unit()).unwrap();
        assert_eq!(g.vertex_count(), 5);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_graph(Path::new("/nonexistent/edges"), None, Rect::unit()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn edge_mutation() {
        let mut g = DirectedPropertyGraph::new(3, Rect::unit());
        assert!(g.add_edge(0, 2).unwrap());
        assert!(!g.add_edge(0, 2).unwrap());
        assert!(!g.add_edge(1, 1).unwrap());
        assert_eq!(g.in_neighbors(2), &[0]);
        assert!(g.remove_edge(0, 2).unwrap());
        assert!(!g.remove_edge(0, 2).unwrap());
        assert!(g.add_edge(0, 3).is_err());
        assert_eq!(g.edge_count(), 0);
    }
}
