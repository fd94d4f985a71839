//! Incremental maintenance against from-scratch rebuilds.

mod common;

use common::*;
use proptest::prelude::*;
use rangereach::graph::DirectedPropertyGraph;
use rangereach::grid::{Rect, SpatialPoint};
use rangereach::index::{IndexConfig, Preset, SpaGraph};
use rangereach::query::range_reach;
use rangereach::workload::Distribution;

fn base(seed: u64) -> DirectedPropertyGraph {
    GraphCase {
        n: 200,
        avg_degree: 1.2,
        acyclic: false,
        ratio: 0.5,
        distribution: Distribution::Uniform,
        seed,
    }
    .graph()
}

fn assert_answers_match(s: &SpaGraph, seed: u64) {
    let fresh = SpaGraph::build(s.graph().clone(), *s.config()).unwrap();
    for (_, v, q) in mixed_queries(s.graph(), 1000, seed) {
        assert_eq!(
            range_reach(s, v, &q).unwrap().answer,
            range_reach(&fresh, v, &q).unwrap().answer,
            "{} v={v} q={q:?}",
            s.config().max_rmbr
        );
    }
}

#[test]
fn hundred_insertions_match_a_rebuild() {
    for p in Preset::ALL {
        let mut s = SpaGraph::build(base(1), p.config()).unwrap();
        let mut r = rng(10);
        let mut added = 0;
        while added < 100 {
            let (u, v) = (rand::Rng::random_range(&mut r, 0..200), rand::Rng::random_range(&mut r, 0..200));
            if u != v && !s.graph().has_edge(u, v) {
                s.add_edge(u, v).unwrap();
                added += 1;
            }
        }
        assert_answers_match(&s, 11);
    }
}

#[test]
fn hundred_deletions_match_a_rebuild() {
    for p in Preset::ALL {
        let mut s = SpaGraph::build(base(2), p.config()).unwrap();
        let mut r = rng(20);
        for _ in 0..100 {
            let edges: Vec<_> = s.graph().edges().collect();
            let (u, v) = edges[rand::Rng::random_range(&mut r, 0..edges.len())];
            s.delete_edge(u, v).unwrap();
        }
        assert_answers_match(&s, 21);
    }
}

#[test]
fn add_then_delete_restores_answers() {
    let g = base(3);
    let s0 = SpaGraph::build(g, Preset::GeoMT3.config()).unwrap();
    let mut s = s0.clone();
    let mut r = rng(30);
    for _ in 0..30 {
        let (u, v) = (rand::Rng::random_range(&mut r, 0..200), rand::Rng::random_range(&mut r, 0..200));
        if u == v || s.graph().has_edge(u, v) {
            continue;
        }
        s.add_edge(u, v).unwrap();
        s.delete_edge(u, v).unwrap();
    }
    assert_eq!(s.graph(), s0.graph());
    for (_, v, q) in mixed_queries(s.graph(), 1000, 31) {
        assert_eq!(range_reach(&s, v, &q).unwrap().answer, range_reach(&s0, v, &q).unwrap().answer);
    }
}

#[test]
fn bad_operations_are_rejected_without_side_effects() {
    let mut s = SpaGraph::build(base(4), IndexConfig::default()).unwrap();
    let before = s.clone();
    let (u, v) = s.graph().edges().next().unwrap();
    assert!(s.add_edge(u, v).is_err());
    assert!(s.delete_edge(v, 10_000).is_err());
    assert!(s.add_edge(0, 10_000).is_err());
    let absent = (0..200).find(|&w| w != u && !s.graph().has_edge(u, w)).unwrap();
    assert!(s.delete_edge(u, absent).is_err());
    assert_eq!(s, before);
}

fn arb_ops() -> impl Strategy<Value = (Vec<Option<(f64, f64)>>, Vec<(usize, usize)>)> {
    (
        proptest::collection::vec(proptest::option::of((0.0..=1.0f64, 0.0..=1.0f64)), 16),
        proptest::collection::vec((0usize..16, 0usize..16), 1..60),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Toggling random edges keeps GeoMT0 identical to a rebuild and every
    /// other preset answering like BFS.
    #[test]
    fn toggles_keep_payloads_exact((pts, ops) in arb_ops()) {
        let mut g = DirectedPropertyGraph::new(16, Rect::unit());
        for (v, p) in pts.into_iter().enumerate() {
            if let Some((x, y)) = p {
                g.set_spatial(v, SpatialPoint::new(x, y)).unwrap();
            }
        }
        let mut indices: Vec<SpaGraph> = Preset::ALL.iter().map(|p| SpaGraph::build(g.clone(), p.config().with_resolution(8)).unwrap()).collect();
        let q = Rect::new(0.2, 0.2, 0.7, 0.6);
        for (u, v) in ops {
            if u == v {
                continue;
            }
            for s in indices.iter_mut() {
                if s.graph().has_edge(u, v) {
                    s.delete_edge(u, v).unwrap();
                } else {
                    s.add_edge(u, v).unwrap();
                }
            }
            prop_assert_eq!(&indices[0], &indices[0].rebuild().unwrap());
            for s in &indices {
                for w in 0..16 {
                    prop_assert_eq!(range_reach(s, w, &q).unwrap().answer, oracle(s.graph(), w, &q));
                }
            }
        }
    }
}
