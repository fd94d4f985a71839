//! The twelve-vertex social network used throughout the worked examples.

mod common;

use common::*;
use rangereach::baselines::{build_spareach, build_tc, spareach_query, tc_query, traversal_query};
use rangereach::condense::condense;
use rangereach::grid::{rect_relation, Rect, Relation};
use rangereach::index::{decode_snapshot, encode_snapshot, AuxKind, SpaAux, SpaGraph};
use rangereach::query::{range_reach, Termination};

fn query_r() -> Rect {
    Rect::new(0.35, 0.35, 1.0, 1.0)
}

fn query_q() -> Rect {
    Rect::new(0.2, 0.7, 0.55, 1.0)
}

#[test]
fn fixture_counts_match_the_drawing() {
    let g = social_graph();
    assert_eq!(g.vertex_count(), 12);
    assert_eq!(g.edge_count(), 15);
    let spatial: Vec<usize> = g.spatial_vertices().map(|(v, _)| v).collect();
    assert_eq!(spatial, ['e', 'f', 'g', 'h', 'i'].map(id).to_vec());
}

#[test]
fn spatial_sinks_come_before_their_ancestors() {
    let g = social_graph();
    let c = condense(&g);
    let order = c.reverse_topological_order();
    let pos = |v: char| order.iter().position(|&x| x == c.component_of(id(v))).unwrap();
    for sink in ['f', 'h', 'd'] {
        for v in 'a'..='l' {
            if v != sink && g.reachable_from(id(v))[id(sink)] {
                assert!(pos(sink) < pos(v), "{sink} after {v}");
            }
        }
    }
}

#[test]
fn payload_table() {
    let s = SpaGraph::build(social_graph(), social_config()).unwrap();
    let kinds: String = ('a'..='l')
        .map(|v| match s.aux(id(v)).unwrap().kind() {
            AuxKind::B => 'B',
            AuxKind::R => 'R',
            AuxKind::G => 'G',
        })
        .collect();
    assert_eq!(kinds, "BGGBGBGBGRBG");
    assert_eq!(s.covered_l0_set(id('b')).unwrap().unwrap(), vec![2, 9, 10, 13, 14]);
    // j keeps the exact bounding box of g, h, i and f
    let pts = strictly_reachable_points(s.graph(), id('j'));
    assert_eq!(s.aux(id('j')).unwrap(), &SpaAux::R(mbr(&pts)));
    // a reaches every point; their box covers more than 80% of the space
    let all = mbr(&strictly_reachable_points(s.graph(), id('a')));
    assert!(all.area() > 0.8);
    assert_eq!(s.aux(id('a')).unwrap(), &SpaAux::B(true));
}

#[test]
fn query_r_partially_covers_the_rmbr_of_j() {
    let s = SpaGraph::build(social_graph(), social_config()).unwrap();
    let SpaAux::R(rmbr) = s.aux(id('j')).unwrap() else {
        panic!("j is not an R-vertex");
    };
    assert_eq!(rect_relation(&query_r(), rmbr), Relation::Overlaps);
}

#[test]
fn query_q_stops_at_c_on_a_contained_cell() {
    let s = SpaGraph::build(social_graph(), social_config()).unwrap();
    let o = range_reach(&s, id('a'), &query_q()).unwrap();
    assert!(o.answer);
    assert_eq!(o.terminated_by, Termination::GCellContained);
    assert_eq!(o.expanded, 1, "only a is expanded before c is judged");
}

#[test]
fn every_engine_answers_the_running_example() {
    let g = social_graph();
    let s = SpaGraph::build(g.clone(), social_config()).unwrap();
    let tc = build_tc(&g).unwrap();
    let sr = build_spareach(&g, 4);
    let r = query_r();
    let inside: Vec<usize> = sr.spatial_index().range(&r);
    assert_eq!(inside, ['f', 'g', 'i'].map(id).to_vec());
    let row: Vec<_> = tc.reachable_points(id('a')).collect();
    assert_eq!(row.len(), 5);
    for v in 'a'..='l' {
        for q in [query_r(), query_q()] {
            let want = oracle(&g, id(v), &q);
            assert_eq!(range_reach(&s, id(v), &q).unwrap().answer, want, "{v}");
            assert_eq!(traversal_query(s.condensation(), id(v), &q).unwrap().answer, want);
            assert_eq!(tc_query(&tc, id(v), &q).unwrap(), want);
            assert_eq!(spareach_query(&sr, id(v), &q).unwrap().0, want);
        }
    }
    assert!(range_reach(&s, id('a'), &r).unwrap().answer);
    assert!(!traversal_query(s.condensation(), id('l'), &r).unwrap().answer);
    assert!(!range_reach(&s, id('d'), &r).unwrap().answer);
}

#[test]
fn deleting_c_to_i_matches_a_rebuild() {
    let mut s = SpaGraph::build(social_graph(), social_config()).unwrap();
    s.delete_edge(id('c'), id('i')).unwrap();
    assert_eq!(s.aux(id('c')).unwrap(), &SpaAux::B(false));
    let fresh = s.rebuild().unwrap();
    for (_, v, q) in mixed_queries(s.graph(), 400, 5) {
        assert_eq!(range_reach(&s, v, &q).unwrap().answer, range_reach(&fresh, v, &q).unwrap().answer);
    }
}

#[test]
fn snapshot_preserves_the_table() {
    let s = SpaGraph::build(social_graph(), social_config()).unwrap();
    let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
    for v in 0..12 {
        assert_eq!(back.aux(v).unwrap(), s.aux(v).unwrap());
    }
}
