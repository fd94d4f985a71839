//! Strongly connected component condensation.
//!
//! Components are numbered canonically by their smallest member vertex, so a
//! DAG condenses to itself with identical ids. Maintenance may leave dead
//! slots (merged components) or out-of-order ids (split components) behind
//! until [`Condensation::compact`] renumbers them.

use crate::graph::{DirectedPropertyGraph, VertexId};
use crate::grid::{Rect, SpatialPoint};

pub type ComponentId = usize;

/// Tarjan's algorithm, iterative. Components come out sinks first.
pub(crate) fn strongly_connected<'a, F>(n: usize, succ: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> &'a [usize],
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0;
    let mut comps = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        calls.push((root, 0));
        while let Some(frame) = calls.last_mut() {
            let v = frame.0;
            let s = succ(v);
            if frame.1 < s.len() {
                let w = s[frame.1];
                frame.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(p, _)) = calls.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn bump(list: &mut Vec<(ComponentId, u32)>, c: ComponentId) -> bool {
    match list.binary_search_by_key(&c, |e| e.0) {
        Ok(i) => {
            list[i].1 += 1;
            false
        }
        Err(i) => {
            list.insert(i, (c, 1));
            true
        }
    }
}

fn drop_one(list: &mut Vec<(ComponentId, u32)>, c: ComponentId) -> bool {
    let i = list
        .binary_search_by_key(&c, |e| e.0)
        .expect("edge multiplicity out of sync");
    list[i].1 -= 1;
    if list[i].1 == 0 {
        list.remove(i);
        true
    } else {
        false
    }
}

fn drop_all(list: &mut Vec<(ComponentId, u32)>, c: ComponentId) {
    if let Ok(i) = list.binary_search_by_key(&c, |e| e.0) {
        list.remove(i);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condensation {
    component_of: Vec<ComponentId>,
    members: Vec<Vec<VertexId>>,
    /// Out-neighbour components with the number of original edges behind
    /// each DAG edge, sorted by id.
    out: Vec<Vec<(ComponentId, u32)>>,
    inn: Vec<Vec<(ComponentId, u32)>>,
    points: Vec<Vec<SpatialPoint>>,
    points_mbr: Vec<Rect>,
    live: usize,
}

impl Condensation {
    pub fn new(g: &DirectedPropertyGraph) -> Self {
        let n = g.vertex_count();
        let mut comps = strongly_connected(n, |v| g.out_neighbors(v));
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort_unstable_by_key(|c| c[0]);
        let mut cond = Condensation {
            component_of: vec![0; n],
            members: Vec::new(),
            out: Vec::new(),
            inn: Vec::new(),
            points: Vec::new(),
            points_mbr: Vec::new(),
            live: 0,
        };
        for comp in comps {
            cond.push_component(comp, g);
        }
        for c in 0..cond.members.len() {
            cond.wire_out(c, g);
        }
        cond
    }

    fn push_component(&mut self, members: Vec<VertexId>, g: &DirectedPropertyGraph) -> ComponentId {
        let id = self.members.len();
        for &v in &members {
            self.component_of[v] = id;
        }
        self.members.push(members);
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.points.push(Vec::new());
        self.points_mbr.push(Rect::EMPTY);
        self.refresh_points(id, g);
        self.live += 1;
        id
    }

    fn refresh_points(&mut self, c: ComponentId, g: &DirectedPropertyGraph) {
        let pts: Vec<SpatialPoint> = self.members[c].iter().filter_map(|&v| g.spatial(v)).collect();
        self.points_mbr[c] = pts.iter().fold(Rect::EMPTY, |acc, p| acc.union_point(*p));
        self.points[c] = pts;
    }

    /// Adds the DAG edges leaving `c` (both directions of bookkeeping).
    fn wire_out(&mut self, c: ComponentId, g: &DirectedPropertyGraph) {
        for i in 0..self.members[c].len() {
            let u = self.members[c][i];
            for &v in g.out_neighbors(u) {
                let cv = self.component_of[v];
                if cv != c {
                    bump(&mut self.out[c], cv);
                    bump(&mut self.inn[cv], c);
                }
            }
        }
    }

    /// Recomputes every DAG edge touching `comps` from the graph.
    fn rewire(&mut self, comps: &[ComponentId], g: &DirectedPropertyGraph) {
        for &c in comps {
            for (n, _) in std::mem::take(&mut self.out[c]) {
                drop_all(&mut self.inn[n], c);
            }
            for (n, _) in std::mem::take(&mut self.inn[c]) {
                drop_all(&mut self.out[n], c);
            }
        }
        for &c in comps {
            self.wire_out(c, g);
        }
        for &c in comps {
            for i in 0..self.members[c].len() {
                let v = self.members[c][i];
                for &u in g.in_neighbors(v) {
                    let cu = self.component_of[u];
                    if cu != c && !comps.contains(&cu) {
                        bump(&mut self.inn[c], cu);
                        bump(&mut self.out[cu], c);
                    }
                }
            }
        }
    }

    pub fn component_of(&self, v: VertexId) -> ComponentId {
        self.component_of[v]
    }

    pub fn component_assignment(&self) -> &[ComponentId] {
        &self.component_of
    }

    /// Number of id slots, dead ones included.
    pub fn num_slots(&self) -> usize {
        self.members.len()
    }

    pub fn num_components(&self) -> usize {
        self.live
    }

    pub fn is_live(&self, c: ComponentId) -> bool {
        !self.members[c].is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = ComponentId> + '_ {
        (0..self.members.len()).filter(|&c| self.is_live(c))
    }

    pub fn members(&self, c: ComponentId) -> &[VertexId] {
        &self.members[c]
    }

    pub fn points(&self, c: ComponentId) -> &[SpatialPoint] {
        &self.points[c]
    }

    pub fn points_mbr(&self, c: ComponentId) -> Rect {
        self.points_mbr[c]
    }

    pub fn is_spatial(&self, c: ComponentId) -> bool {
        !self.points[c].is_empty()
    }

    /// Ascending.
    pub fn out_neighbors(&self, c: ComponentId) -> impl ExactSizeIterator<Item = ComponentId> + '_ {
        self.out[c].iter().map(|e| e.0)
    }

    /// Ascending.
    pub fn in_neighbors(&self, c: ComponentId) -> impl ExactSizeIterator<Item = ComponentId> + '_ {
        self.inn[c].iter().map(|e| e.0)
    }

    pub fn out_degree(&self, c: ComponentId) -> usize {
        self.out[c].len()
    }

    pub fn dag_edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Components ordered so that every out-neighbour precedes its source
    /// (sinks first).
    pub fn reverse_topological_order(&self) -> Vec<ComponentId> {
        let slots = self.members.len();
        let mut done = vec![false; slots];
        let mut order = Vec::with_capacity(self.live);
        let mut calls: Vec<(ComponentId, usize)> = Vec::new();
        for root in self.components() {
            if done[root] {
                continue;
            }
            done[root] = true;
            calls.push((root, 0));
            while let Some(frame) = calls.last_mut() {
                let c = frame.0;
                if let Some(&(w, _)) = self.out[c].get(frame.1) {
                    frame.1 += 1;
                    if !done[w] {
                        done[w] = true;
                        calls.push((w, 0));
                    }
                } else {
                    calls.pop();
                    order.push(c);
                }
            }
        }
        order
    }

    /// DAG reachability `a ⇝ b` (reflexive), by DFS.
    pub fn reaches(&self, a: ComponentId, b: ComponentId) -> bool {
        if a == b {
            return true;
        }
        let mut seen = vec![false; self.members.len()];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(c) = stack.pop() {
            for w in self.out_neighbors(c) {
                if w == b {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    fn forward_set(&self, from: ComponentId) -> Vec<bool> {
        let mut seen = vec![false; self.members.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(c) = stack.pop() {
            for w in self.out_neighbors(c) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    fn backward_set(&self, from: ComponentId) -> Vec<bool> {
        let mut seen = vec![false; self.members.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(c) = stack.pop() {
            for w in self.in_neighbors(c) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Records a new graph edge between two different components. Returns
    /// `true` when it creates a new DAG edge.
    pub(crate) fn note_edge_added(&mut self, cu: ComponentId, cv: ComponentId) -> bool {
        debug_assert_ne!(cu, cv);
        bump(&mut self.inn[cv], cu);
        bump(&mut self.out[cu], cv)
    }

    /// Forgets one graph edge between two different components. Returns
    /// `true` when the DAG edge disappeared.
    pub(crate) fn note_edge_removed(&mut self, cu: ComponentId, cv: ComponentId) -> bool {
        debug_assert_ne!(cu, cv);
        drop_one(&mut self.inn[cv], cu);
        drop_one(&mut self.out[cu], cv)
    }

    /// Collapses every component lying on a path `from ⇝ to` into one. Call
    /// after the graph gained an edge closing the cycle `to -> from`; the
    /// new edge must not have been recorded yet. Returns the surviving id and
    /// the ids that died.
    pub(crate) fn merge_cycle(
        &mut self,
        from: ComponentId,
        to: ComponentId,
        g: &DirectedPropertyGraph,
    ) -> (ComponentId, Vec<ComponentId>) {
        let fwd = self.forward_set(from);
        let bwd = self.backward_set(to);
        let cycle: Vec<ComponentId> = (0..self.members.len()).filter(|&c| fwd[c] && bwd[c]).collect();
        let keep = cycle[0];
        let dead: Vec<ComponentId> = cycle[1..].to_vec();
        for &c in &cycle {
            for (n, _) in std::mem::take(&mut self.out[c]) {
                drop_all(&mut self.inn[n], c);
            }
            for (n, _) in std::mem::take(&mut self.inn[c]) {
                drop_all(&mut self.out[n], c);
            }
        }
        let mut merged = Vec::new();
        for &c in &cycle {
            merged.append(&mut self.members[c]);
            self.points[c].clear();
            self.points_mbr[c] = Rect::EMPTY;
        }
        merged.sort_unstable();
        for &v in &merged {
            self.component_of[v] = keep;
        }
        self.members[keep] = merged;
        self.live -= dead.len();
        self.refresh_points(keep, g);
        self.rewire(&[keep], g);
        (keep, dead)
    }

    /// Re-runs SCC detection inside `c` after one of its internal edges was
    /// removed from `g`. Returns the resulting components (just `[c]` when it
    /// stayed strongly connected); the first keeps id `c`.
    pub(crate) fn split(&mut self, c: ComponentId, g: &DirectedPropertyGraph) -> Vec<ComponentId> {
        let members = self.members[c].clone();
        let local = |v: VertexId| members.binary_search(&v).ok();
        let adj: Vec<Vec<usize>> = members
            .iter()
            .map(|&u| g.out_neighbors(u).iter().filter_map(|&v| local(v)).collect())
            .collect();
        let mut parts = strongly_connected(members.len(), |i| &adj[i]);
        if parts.len() == 1 {
            return vec![c];
        }
        let mut parts: Vec<Vec<VertexId>> = parts
            .iter_mut()
            .map(|p| {
                let mut vs: Vec<VertexId> = p.iter().map(|&i| members[i]).collect();
                vs.sort_unstable();
                vs
            })
            .collect();
        parts.sort_unstable_by_key(|p| p[0]);
        let mut ids = Vec::with_capacity(parts.len());
        let mut iter = parts.into_iter();
        let first = iter.next().unwrap();
        self.members[c] = first;
        self.refresh_points(c, g);
        ids.push(c);
        for p in iter {
            // push_component also relabels component_of for its members
            ids.push(self.push_component(p, g));
        }
        self.rewire(&ids, g);
        ids
    }

    /// Renumbers live components canonically. Returns the old→new map
    /// (`None` for dead slots) when anything moved.
    pub(crate) fn compact(&mut self) -> Option<Vec<Option<ComponentId>>> {
        let mut order: Vec<ComponentId> = self.components().collect();
        order.sort_unstable_by_key(|&c| self.members[c][0]);
        let identity = order.len() == self.members.len() && order.iter().enumerate().all(|(i, &c)| i == c);
        if identity {
            return None;
        }
        let mut map = vec![None; self.members.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = Some(new);
        }
        let remap = |list: &Vec<(ComponentId, u32)>| -> Vec<(ComponentId, u32)> {
            let mut l: Vec<(ComponentId, u32)> = list.iter().map(|&(c, k)| (map[c].unwrap(), k)).collect();
            l.sort_unstable_by_key(|e| e.0);
            l
        };
        let members = order.iter().map(|&c| std::mem::take(&mut self.members[c])).collect();
        let out = order.iter().map(|&c| remap(&self.out[c])).collect();
        let inn = order.iter().map(|&c| remap(&self.inn[c])).collect();
        let points = order.iter().map(|&c| std::mem::take(&mut self.points[c])).collect();
        let points_mbr = order.iter().map(|&c| self.points_mbr[c]).collect();
        self.members = members;
        self.out = out;
        self.inn = inn;
        self.points = points;
        self.points_mbr = points_mbr;
        for c in self.component_of.iter_mut() {
            *c = map[*c].unwrap();
        }
        Some(map)
    }
}

pub fn condense(g: &DirectedPropertyGraph) -> Condensation {
    Condensation::new(g)
}

pub fn reverse_topological_order(c: &Condensation) -> Vec<ComponentId> {
    c.reverse_topological_order()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(text: &str) -> DirectedPropertyGraph {
        parse_graph(text, None, Rect::unit()).unwrap().0
    }

    fn random_graph(n: usize, m: usize, seed: u64) -> DirectedPropertyGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DirectedPropertyGraph::new(n, Rect::unit());
        while g.edge_count() < m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            g.add_edge(u, v).unwrap();
        }
        g
    }

    #[test]
    fn dag_condenses_to_itself() {
        let g = graph("0 1\n0 2\n2 3\n1 3\n");
        let c = condense(&g);
        assert_eq!(c.num_components(), 4);
        for v in 0..4 {
            assert_eq!(c.component_of(v), v);
            assert_eq!(c.out_neighbors(v).collect::<Vec<_>>(), g.out_neighbors(v));
        }
    }

    #[test]
    fn three_cycle_is_one_component() {
        let c = condense(&graph("0 1\n1 2\n2 0\n"));
        assert_eq!(c.num_components(), 1);
        assert_eq!(c.members(0), &[0, 1, 2]);
        assert_eq!(c.dag_edge_count(), 0);
    }

    #[test]
    fn chain_order_is_sinks_first() {
        let c = condense(&graph("0 1\n1 2\n"));
        assert_eq!(reverse_topological_order(&c), vec![2, 1, 0]);
    }

    #[test]
    fn component_points_are_the_union_of_members() {
        let (g, _) = parse_graph("0 1\n1 0\n1 2\n", Some("0 0.1 0.1\n1 0.9 0.5\n2 0.5 0.5\n"), Rect::unit()).unwrap();
        let c = condense(&g);
        let cc = c.component_of(0);
        assert_eq!(c.points(cc).len(), 2);
        assert_eq!(c.points_mbr(cc), Rect::new(0.1, 0.1, 0.9, 0.5));
    }

    #[test]
    fn lifted_reachability_matches_bfs_on_random_digraphs() {
        for seed in 0..4 {
            let g = random_graph(200, 300 + 60 * seed as usize, seed);
            let c = condense(&g);
            for u in 0..g.vertex_count() {
                let truth = g.reachable_from(u);
                for v in 0..g.vertex_count() {
                    let lifted = c.reaches(c.component_of(u), c.component_of(v));
                    assert_eq!(truth[v], lifted, "{u} -> {v}");
                }
            }
            // acyclic condensation
            let order = reverse_topological_order(&c);
            let mut pos = vec![0; c.num_slots()];
            for (i, &k) in order.iter().enumerate() {
                pos[k] = i;
            }
            for k in c.components() {
                for w in c.out_neighbors(k) {
                    assert!(pos[w] < pos[k]);
                }
            }
        }
    }

    #[test]
    fn random_dag_order_is_a_linear_extension() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = DirectedPropertyGraph::new(500, Rect::unit());
        for _ in 0..2000 {
            let a = rng.random_range(0..500);
            let b = rng.random_range(0..500);
            g.add_edge(a.min(b), a.max(b)).unwrap();
        }
        let c = condense(&g);
        assert_eq!(c.num_components(), 500);
        let order = reverse_topological_order(&c);
        assert_eq!(order.len(), 500);
        let mut pos = vec![0; 500];
        for (i, &k) in order.iter().enumerate() {
            pos[k] = i;
        }
        for (u, v) in g.edges() {
            assert!(pos[v] < pos[u]);
        }
    }

    #[test]
    fn merge_and_split_track_the_graph() {
        let mut g = graph("0 1\n1 2\n2 3\n3 4\n");
        let mut c = condense(&g);
        g.add_edge(3, 1).unwrap();
        let (keep, dead) = c.merge_cycle(c.component_of(1), c.component_of(3), &g);
        assert_eq!(keep, 1);
        assert_eq!(dead, vec![2, 3]);
        assert_eq!(c.members(1), &[1, 2, 3]);
        assert_eq!(c.num_components(), 3);
        c.compact();
        assert_eq!(c, condense(&g));

        g.remove_edge(2, 3).unwrap();
        let cc = c.component_of(2);
        let parts = c.split(cc, &g);
        assert_eq!(parts.len(), 3);
        c.compact();
        assert_eq!(c, condense(&g));
    }
}
