use super::{CellSet, SpaAux, SpaGraph};

/// Per-kind tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindTally {
    pub b: usize,
    pub r: usize,
    pub g: usize,
}

impl KindTally {
    pub fn total(&self) -> usize {
        self.b + self.r + self.g
    }
}

/// Deterministic byte accounting of the payload table. B-vertices cost one
/// byte, R-vertices four `f64` coordinates, G-vertices the size of their
/// delta-varint encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StorageReport {
    pub bytes_total: usize,
    pub bytes_by_kind: KindTally,
    pub counts_by_kind: KindTally,
    pub cells_stored: usize,
    pub rmbrs_stored: usize,
}

pub(crate) const RMBR_BYTES: usize = 32;

pub(crate) fn varint_len(mut v: u64) -> usize {
    let mut n = 1;
    while v >= 0x80 {
        v >>= 7;
        n += 1;
    }
    n
}

pub(crate) fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

/// Length prefix followed by the gaps between consecutive sorted ids (the
/// first gap is measured from zero).
pub(crate) fn encode_cells(out: &mut Vec<u8>, cells: &CellSet) {
    write_varint(out, cells.len() as u64);
    let mut prev = 0u32;
    for c in cells.iter() {
        write_varint(out, (c - prev) as u64);
        prev = c;
    }
}

pub fn encoded_cells_len(cells: &CellSet) -> usize {
    let mut prev = 0u32;
    let mut n = varint_len(cells.len() as u64);
    for c in cells.iter() {
        n += varint_len((c - prev) as u64);
        prev = c;
    }
    n
}

impl StorageReport {
    pub fn of(s: &SpaGraph) -> Self {
        let mut r = StorageReport::default();
        for (_, aux) in s.payloads() {
            match aux {
                SpaAux::B(_) => {
                    r.counts_by_kind.b += 1;
                    r.bytes_by_kind.b += 1;
                }
                SpaAux::R(_) => {
                    r.counts_by_kind.r += 1;
                    r.bytes_by_kind.r += RMBR_BYTES;
                    r.rmbrs_stored += 1;
                }
                SpaAux::G(cells) => {
                    r.counts_by_kind.g += 1;
                    r.bytes_by_kind.g += encoded_cells_len(cells);
                    r.cells_stored += cells.len();
                }
            }
        }
        r.bytes_total = r.bytes_by_kind.total();
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, DirectedPropertyGraph};
    use crate::grid::{Rect, SpatialPoint};
    use crate::index::{IndexConfig, Preset};

    #[test]
    fn varint_lengths() {
        for (v, n) in [(0u64, 1), (127, 1), (128, 2), (16383, 2), (16384, 3)] {
            assert_eq!(varint_len(v), n);
            let mut out = Vec::new();
            write_varint(&mut out, v);
            assert_eq!(out.len(), n);
        }
        let cells = CellSet::from_ids(21845, [5, 200, 16000]);
        let mut out = Vec::new();
        encode_cells(&mut out, &cells);
        assert_eq!(out.len(), encoded_cells_len(&cells));
        assert_eq!(out.len(), 1 + 1 + 2 + 2);
    }

    #[test]
    fn all_b_costs_one_byte_each() {
        let (g, _) = parse_graph("n 7\n0 1\n1 2\n3 4\n", None, Rect::unit()).unwrap();
        let r = SpaGraph::build(g, IndexConfig::default()).unwrap().storage_report();
        assert_eq!(r.bytes_total, 7);
        assert_eq!(r.counts_by_kind.b, 7);
    }

    #[test]
    fn one_r_vertex_costs_thirty_two_bytes() {
        let (g, _) = parse_graph("0 1\n", Some("1 0.3 0.3\n"), Rect::unit()).unwrap();
        let r = SpaGraph::build(g, Preset::GeoRMBR.config()).unwrap().storage_report();
        assert_eq!(r.bytes_by_kind.r, 32);
        assert_eq!(r.bytes_total, 32 + 1);
    }

    #[test]
    fn star_into_one_sink_favours_cells_over_rectangles() {
        let n = 200;
        let mut g = DirectedPropertyGraph::new(n + 1, Rect::unit());
        g.set_spatial(n, SpatialPoint::new(0.42, 0.77)).unwrap();
        for v in 0..n {
            g.add_edge(v, n).unwrap();
        }
        let mt0 = SpaGraph::build(g.clone(), Preset::GeoMT0.config()).unwrap().storage_report();
        let rmbr = SpaGraph::build(g, Preset::GeoRMBR.config()).unwrap().storage_report();
        assert_eq!(mt0.counts_by_kind.g, n);
        assert_eq!(rmbr.counts_by_kind.r, n);
        assert!(mt0.bytes_total < rmbr.bytes_total);
        assert!(mt0.bytes_by_kind.g / n < RMBR_BYTES);
    }
}
