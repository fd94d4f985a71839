//! Versioned binary snapshot of a built index.
//!
//! Layout, all integers little-endian or LEB128 varints:
//!
//! ```text
//! "SPAG" u16 version
//! config   f64 max_rmbr, u64 max_reach_grids (u64::MAX = unlimited), u8 merge_count, u32 resolution
//! bounds   4 × f64
//! graph    varint n, varint m, m × (varint u, varint v),
//!          varint spatial count, per point (varint vertex, f64 x, f64 y)
//! components varint count, n × varint component id
//! payloads per component: tag {B=0, R=1, G=2} then 1-byte bool | 4 × f64 | varint cell list
//! ```
//!
//! Component ids are canonical (ordered by smallest member), so a decoded
//! index re-encodes to the same bytes.

use std::path::Path;

use super::storage::{encode_cells, write_varint};
use super::{CellSet, IndexConfig, SpaAux, SpaGraph};
use crate::error::{Error, Result};
use crate::graph::DirectedPropertyGraph;
use crate::grid::{HierarchicalGrid, Rect, SpatialPoint};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"SPAG";
pub const SNAPSHOT_VERSION: u16 = 1;

const TAG_B: u8 = 0;
const TAG_R: u8 = 1;
const TAG_G: u8 = 2;

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn encode_snapshot(s: &SpaGraph) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());

    let cfg = s.config();
    put_f64(&mut out, cfg.max_rmbr);
    let grids = cfg.max_reach_grids.map_or(u64::MAX, |k| k as u64);
    out.extend_from_slice(&grids.to_le_bytes());
    out.push(cfg.merge_count);
    out.extend_from_slice(&cfg.top_resolution.to_le_bytes());

    let g = s.graph();
    let b = g.bounds();
    for v in [b.min_x, b.min_y, b.max_x, b.max_y] {
        put_f64(&mut out, v);
    }
    write_varint(&mut out, g.vertex_count() as u64);
    write_varint(&mut out, g.edge_count() as u64);
    for (u, v) in g.edges() {
        write_varint(&mut out, u as u64);
        write_varint(&mut out, v as u64);
    }
    write_varint(&mut out, g.spatial_count() as u64);
    for (v, p) in g.spatial_vertices() {
        write_varint(&mut out, v as u64);
        put_f64(&mut out, p.x);
        put_f64(&mut out, p.y);
    }

    let cond = s.condensation();
    write_varint(&mut out, cond.num_components() as u64);
    for &c in cond.component_assignment() {
        write_varint(&mut out, c as u64);
    }
    for c in cond.components() {
        match s.component_aux(c) {
            SpaAux::B(flag) => {
                out.push(TAG_B);
                out.push(*flag as u8);
            }
            SpaAux::R(r) => {
                out.push(TAG_R);
                for v in [r.min_x, r.min_y, r.max_x, r.max_y] {
                    put_f64(&mut out, v);
                }
            }
            SpaAux::G(cells) => {
                out.push(TAG_G);
                encode_cells(&mut out, cells);
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Snapshot(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }

    fn varint(&mut self) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let byte = self.u8()?;
            v |= u64::from(byte & 0x7f) << shift;
            if byte & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::Snapshot(format!("overlong varint before byte {}", self.pos)))
    }

    /// A varint used as a count or id, bounded by `limit`.
    fn index(&mut self, limit: usize, what: &str) -> Result<usize> {
        let v = self.varint()?;
        if v >= limit as u64 {
            return Err(Error::Snapshot(format!("{what} {v} out of range (limit {limit})")));
        }
        Ok(v as usize)
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SpaGraph> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.array()?);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let max_rmbr = r.f64()?;
    let grids = u64::from_le_bytes(r.array()?);
    let config = IndexConfig {
        max_rmbr,
        max_reach_grids: (grids != u64::MAX).then_some(grids as usize),
        merge_count: r.u8()?,
        top_resolution: u32::from_le_bytes(r.array()?),
    };
    config.validate()?;
    let bounds = Rect::new(r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let grid = HierarchicalGrid::new(bounds, config.top_resolution)?;

    let n = r.index(usize::MAX, "vertex count")?;
    if n > bytes.len() {
        return Err(Error::Snapshot(format!("vertex count {n} exceeds snapshot size")));
    }
    let mut g = DirectedPropertyGraph::new(n, bounds);
    let m = r.index(bytes.len() + 1, "edge count")?;
    for _ in 0..m {
        let u = r.index(n, "edge source")?;
        let v = r.index(n, "edge target")?;
        if !g.add_edge(u, v)? {
            return Err(Error::Snapshot(format!("repeated edge {u} -> {v}")));
        }
    }
    let k = r.index(n + 1, "spatial count")?;
    for _ in 0..k {
        let v = r.index(n, "spatial vertex")?;
        let p = SpatialPoint::new(r.f64()?, r.f64()?);
        g.set_spatial(v, p)?;
    }

    let components = r.index(n + 1, "component count")?;
    let mut assignment = Vec::with_capacity(n);
    for _ in 0..n {
        assignment.push(r.index(components, "component id")?);
    }
    let mut aux = Vec::with_capacity(components);
    for _ in 0..components {
        aux.push(match r.u8()? {
            TAG_B => match r.u8()? {
                0 => SpaAux::B(false),
                1 => SpaAux::B(true),
                b => return Err(Error::Snapshot(format!("invalid boolean byte {b}"))),
            },
            TAG_R => SpaAux::R(Rect::new(r.f64()?, r.f64()?, r.f64()?, r.f64()?)),
            TAG_G => {
                let max_id = grid.total_cells();
                let len = r.index(max_id as usize + 1, "cell count")?;
                let mut id = 0u64;
                let mut ids = Vec::with_capacity(len);
                for _ in 0..len {
                    id += r.varint()?;
                    if !grid.is_valid(crate::grid::CellId(id.min(u32::MAX as u64) as u32)) {
                        return Err(Error::Snapshot(format!("invalid cell id {id}")));
                    }
                    ids.push(id as u32);
                }
                let cells = CellSet::from_ids(max_id, ids);
                if cells.len() != len {
                    return Err(Error::Snapshot("repeated cell id".into()));
                }
                SpaAux::G(cells)
            }
            t => return Err(Error::Snapshot(format!("unknown payload tag {t}"))),
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let s = SpaGraph::from_parts(g, config, aux)?;
    if s.condensation().component_assignment() != assignment.as_slice() {
        return Err(Error::Snapshot("component table does not match the graph".into()));
    }
    Ok(s)
}

pub fn save_snapshot(s: &SpaGraph, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(s)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<SpaGraph> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Preset;
    use crate::workload::{assign_spatial, random_graph, Distribution, SpatialAssignment};

    fn sample(seed: u64) -> DirectedPropertyGraph {
        let g = random_graph(300, 2.0, false, seed, Rect::new(-1.0, -1.0, 3.0, 1.0)).unwrap();
        let spec = SpatialAssignment {
            distribution: Distribution::Uniform,
            ratio: 0.6,
            seed,
        };
        assign_spatial(g, &spec).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact_for_every_preset() {
        for preset in Preset::ALL {
            let s = SpaGraph::build(sample(3), preset.config().with_resolution(32)).unwrap();
            let bytes = encode_snapshot(&s);
            let back = decode_snapshot(&bytes).unwrap();
            assert_eq!(back, s, "{preset}");
            assert_eq!(encode_snapshot(&back), bytes, "{preset}");
        }
    }

    #[test]
    fn empty_graph_has_zero_components() {
        let s = SpaGraph::build(DirectedPropertyGraph::new(0, Rect::unit()), IndexConfig::default()).unwrap();
        let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
        assert_eq!(back.condensation().num_components(), 0);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let s = SpaGraph::build(sample(4), IndexConfig::default().with_resolution(16)).unwrap();
        let bytes = encode_snapshot(&s);
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_snapshot(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_snapshot(&magic), Err(Error::Snapshot(_))));
        let mut version = bytes;
        version[4] = 9;
        assert!(decode_snapshot(&version).is_err());
    }
}
