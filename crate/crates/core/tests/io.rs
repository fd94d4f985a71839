//! Graph files survive a load and re-serialize cycle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rangereach::graph::{load_graph, parse_graph};
use rangereach::grid::Rect;

fn sorted_lines(text: &str) -> Vec<String> {
    let mut lines: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('n'))
        .map(str::to_string)
        .collect();
    lines.sort();
    lines
}

#[test]
fn random_edge_file_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    let n = 1000;
    let mut edges = std::collections::BTreeSet::new();
    while edges.len() < 5000 {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            edges.insert((u, v));
        }
    }
    let mut text = format!("n {n}\n");
    for (u, v) in &edges {
        text.push_str(&format!("{u} {v}\n"));
    }
    let mut points = String::new();
    for v in (0..n).step_by(3) {
        points.push_str(&format!("{v} {:?} {:?}\n", rng.random::<f64>(), rng.random::<f64>()));
    }

    let dir = tempfile::tempdir().unwrap();
    let (ep, sp) = (dir.path().join("g.edges"), dir.path().join("g.spatial"));
    std::fs::write(&ep, &text).unwrap();
    std::fs::write(&sp, &points).unwrap();
    let (g, report) = load_graph(&ep, Some(&sp), Rect::unit()).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count()), (1000, 5000));
    assert_eq!(report.self_loops + report.duplicate_edges, 0);

    let mut out = Vec::new();
    g.write_edges(&mut out).unwrap();
    let written = String::from_utf8(out).unwrap();
    assert_eq!(sorted_lines(&written), sorted_lines(&text));
    let mut out = Vec::new();
    g.write_spatial(&mut out).unwrap();
    let written_points = String::from_utf8(out).unwrap();
    assert_eq!(sorted_lines(&written_points), sorted_lines(&points));

    let (again, _) = parse_graph(&written, Some(&written_points), Rect::unit()).unwrap();
    assert_eq!(again, g);
}
