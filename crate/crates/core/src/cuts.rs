//! Vertex-disjoint paths and minimum vertex cuts on the efficiency graph,
//! the optimal-set algorithms, the cut partial order, and the lattice meet.
//!
//! Disjoint paths are found by max-flow on the split-vertex network: every
//! vertex except the endpoints becomes an `in -> out` arc of capacity one,
//! and every undirected edge becomes a pair of unit arcs. The number of
//! inner-vertex-disjoint A-Y paths then equals the minimum A-Y cut size.

use crate::adjustment::{exists_adjustment, Query};
use crate::efficiency::{ancestral_closure, build_h1};
use crate::error::{Error, Result};
use crate::graph::{Dag, UGraph, VertexId, VertexSet};
use std::collections::VecDeque;

/// A maximal bundle of A-Y paths, pairwise disjoint on interior vertices.
/// Each path lists its vertices from `a` to `y` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub paths: Vec<Vec<VertexId>>,
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

struct FlowArc {
    to: usize,
    cap: u32,
    rev: usize,
}

struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    arcs: Vec<FlowArc>,
    source: usize,
    sink: usize,
}

impl FlowNetwork {
    /// Node layout: `2v` is the in-half and `2v + 1` the out-half of vertex
    /// `v`. The endpoints get unbounded split capacity.
    fn from_ugraph(h: &UGraph, a: VertexId, y: VertexId) -> FlowNetwork {
        let n = h.vertex_count();
        let mut net = FlowNetwork {
            adj: vec![Vec::new(); 2 * n],
            arcs: Vec::new(),
            source: 2 * a + 1,
            sink: 2 * y,
        };
        for v in 0..n {
            let cap = if v == a || v == y { u32::MAX } else { 1 };
            net.add_arc(2 * v, 2 * v + 1, cap);
        }
        for (u, v) in h.edges() {
            net.add_arc(2 * u + 1, 2 * v, 1);
            net.add_arc(2 * v + 1, 2 * u, 1);
        }
        net
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: u32) {
        let fwd = self.arcs.len();
        self.arcs.push(FlowArc {
            to,
            cap,
            rev: fwd + 1,
        });
        self.arcs.push(FlowArc {
            to: from,
            cap: 0,
            rev: fwd,
        });
        self.adj[from].push(fwd);
        self.adj[to].push(fwd + 1);
    }

    /// One BFS augmentation of value one; `true` if an augmenting path exists.
    fn augment(&mut self) -> bool {
        let mut prev: Vec<Option<usize>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &ai in &self.adj[u] {
                let arc = &self.arcs[ai];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    prev[arc.to] = Some(ai);
                    if arc.to == self.sink {
                        break 'bfs;
                    }
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[self.sink] {
            return false;
        }
        let mut node = self.sink;
        while node != self.source {
            let ai = prev[node].expect("path reconstruction");
            self.arcs[ai].cap -= 1;
            let rev = self.arcs[ai].rev;
            self.arcs[rev].cap += 1;
            node = self.arcs[rev].to;
        }
        true
    }

    fn max_flow(&mut self) -> usize {
        let mut value = 0;
        while self.augment() {
            value += 1;
        }
        value
    }

    /// Decomposes the computed flow into vertex paths, consuming arcs as it
    /// walks. Arc insertion order makes the result deterministic.
    fn extract_paths(&mut self, flow: usize) -> Vec<Vec<VertexId>> {
        let mut used = vec![false; self.arcs.len()];
        let flow_on = |arcs: &[FlowArc], ai: usize| -> bool {
            // Forward arcs sit at even indices; flow equals the reverse cap.
            ai.is_multiple_of(2) && arcs[arcs[ai].rev].cap > 0
        };
        let mut paths = Vec::new();
        for _ in 0..flow {
            let mut node = self.source;
            let mut path = vec![self.source / 2];
            while node != self.sink {
                let ai = self.adj[node]
                    .iter()
                    .copied()
                    .find(|&ai| !used[ai] && flow_on(&self.arcs, ai))
                    .expect("flow conservation yields a forward arc");
                used[ai] = true;
                node = self.arcs[ai].to;
                if node.is_multiple_of(2) {
                    path.push(node / 2);
                }
                node = node / 2 * 2 + 1; // cross the split arc
                if node / 2 == self.sink / 2 {
                    break;
                }
            }
            paths.push(path);
        }
        paths
    }
}

fn check_endpoints(h: &UGraph, a: VertexId, y: VertexId) -> Result<()> {
    let n = h.vertex_count();
    if a >= n {
        return Err(Error::InvalidVertex(a));
    }
    if y >= n {
        return Err(Error::InvalidVertex(y));
    }
    if a == y {
        return Err(Error::Precondition("endpoints must differ".into()));
    }
    if h.has_edge(a, y) {
        return Err(Error::NoFiniteCut);
    }
    Ok(())
}

/// Maximal bundle of inner-vertex-disjoint `a`-`y` paths.
pub fn disjoint_paths(h: &UGraph, a: VertexId, y: VertexId) -> Result<PathBundle> {
    check_endpoints(h, a, y)?;
    let mut net = FlowNetwork::from_ugraph(h, a, y);
    let flow = net.max_flow();
    let mut paths = net.extract_paths(flow);
    for p in &mut paths {
        if p.last() != Some(&y) {
            p.push(y);
        }
    }
    Ok(PathBundle { paths })
}

/// Size of the minimum `a`-`y` vertex cut.
pub fn min_cut_size(h: &UGraph, a: VertexId, y: VertexId) -> Result<usize> {
    check_endpoints(h, a, y)?;
    let mut net = FlowNetwork::from_ugraph(h, a, y);
    Ok(net.max_flow())
}

/// Whether some minimum `a`-`y` cut contains `v`: adding the edges `a - v`
/// and `v - y` leaves the minimum cut size unchanged exactly in that case.
pub fn is_in_minimum(h: &UGraph, a: VertexId, y: VertexId, v: VertexId) -> Result<bool> {
    let base = min_cut_size(h, a, y)?;
    is_in_minimum_with_base(h, a, y, v, base)
}

fn is_in_minimum_with_base(
    h: &UGraph,
    a: VertexId,
    y: VertexId,
    v: VertexId,
    base: usize,
) -> Result<bool> {
    if v >= h.vertex_count() {
        return Err(Error::InvalidVertex(v));
    }
    if v == a || v == y {
        return Err(Error::Precondition(
            "probe vertex must differ from the endpoints".into(),
        ));
    }
    let extended = h.with_extra_edges(&[(a, v), (v, y)])?;
    Ok(min_cut_size(&extended, a, y)? == base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    Global,
    OptimalMinimal,
    OptimalMinimum,
}

/// Result of one optimal-set computation, in DAG ids.
///
/// `set` is `None` when no admissible adjustment set exists at all, which is
/// distinct from `Some(∅)` (the empty set being optimal).
#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub kind: CutKind,
    pub set: Option<VertexSet>,
    /// For `Global` only: whether the candidate is guaranteed optimal,
    /// i.e. `n ⊆ an({a,y} ∪ l)` or `n` covers every vertex.
    pub global_guaranteed: Option<bool>,
}

impl CutResult {
    pub fn admissible(&self) -> bool {
        self.set.is_some()
    }
}

/// The globally optimal candidate: neighbors of `y` in the efficiency graph.
pub fn find_opt(g: &Dag, q: &Query) -> CutResult {
    if !exists_adjustment(g, q) {
        return CutResult {
            kind: CutKind::Global,
            set: None,
            global_guaranteed: None,
        };
    }
    let eg = build_h1(g, q);
    let nb_y: VertexSet = eg.h1().neighbors(eg.y()).iter().copied().collect();
    let guaranteed = q.n().is_subset(&ancestral_closure(g, q)) || *q.n() == g.all_vertices();
    CutResult {
        kind: CutKind::Global,
        set: Some(eg.to_dag_ids(&nb_y)),
        global_guaranteed: Some(guaranteed),
    }
}

/// The optimal minimal set: depth-first search from `a` in the efficiency
/// graph that collects neighbors of `y` but never expands past them.
pub fn find_opt_minimal(g: &Dag, q: &Query) -> CutResult {
    if !exists_adjustment(g, q) {
        return CutResult {
            kind: CutKind::OptimalMinimal,
            set: None,
            global_guaranteed: None,
        };
    }
    let eg = build_h1(g, q);
    let h = eg.h1();
    let nb_y: VertexSet = h.neighbors(eg.y()).iter().copied().collect();
    let mut out = VertexSet::new();
    let mut visited = vec![false; h.vertex_count()];
    let mut stack = vec![eg.a()];
    while let Some(v) = stack.pop() {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        if nb_y.contains(v) {
            out.insert(v);
        } else {
            stack.extend(h.neighbors(v).iter().copied());
        }
    }
    CutResult {
        kind: CutKind::OptimalMinimal,
        set: Some(eg.to_dag_ids(&out)),
        global_guaranteed: None,
    }
}

/// The optimal minimum set: on each disjoint path, the vertex closest to `y`
/// that belongs to some minimum cut; the union over paths is the answer.
pub fn find_opt_minimum(g: &Dag, q: &Query) -> CutResult {
    if !exists_adjustment(g, q) {
        return CutResult {
            kind: CutKind::OptimalMinimum,
            set: None,
            global_guaranteed: None,
        };
    }
    let eg = build_h1(g, q);
    let h = eg.h1();
    let bundle =
        disjoint_paths(h, eg.a(), eg.y()).expect("an admissible pair leaves a and y non-adjacent");
    let base = bundle.len();
    let mut out = VertexSet::new();
    for path in &bundle.paths {
        let interior = &path[1..path.len() - 1];
        for &v in interior.iter().rev() {
            if is_in_minimum_with_base(h, eg.a(), eg.y(), v, base)
                .expect("interior vertex is valid")
            {
                out.insert(v);
                break;
            }
        }
    }
    CutResult {
        kind: CutKind::OptimalMinimum,
        set: Some(eg.to_dag_ids(&out)),
        global_guaranteed: None,
    }
}

fn require_cut(h: &UGraph, a: VertexId, y: VertexId, z: &VertexSet) -> Result<()> {
    if z.contains(a) || z.contains(y) {
        return Err(Error::NotACut(format!(
            "{} contains an endpoint",
            h.format_set(z)
        )));
    }
    if !h.u_separated(a, y, z)? {
        return Err(Error::NotACut(format!(
            "{} does not separate the endpoints",
            h.format_set(z)
        )));
    }
    Ok(())
}

/// Whether `z` is an `a`-`y` cut in `h`.
pub fn is_cut(h: &UGraph, a: VertexId, y: VertexId, z: &VertexSet) -> Result<bool> {
    if z.contains(a) || z.contains(y) {
        return Ok(false);
    }
    h.u_separated(a, y, z)
}

/// A cut none of whose proper subsets is a cut. For vertex cuts it is enough
/// to try removing one element at a time.
pub fn is_minimal_cut(h: &UGraph, a: VertexId, y: VertexId, z: &VertexSet) -> Result<bool> {
    if !is_cut(h, a, y, z)? {
        return Ok(false);
    }
    for v in z.iter() {
        let mut smaller = z.clone();
        smaller.remove(v);
        if h.u_separated(a, y, &smaller)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A cut of the smallest possible cardinality.
pub fn is_minimum_cut(h: &UGraph, a: VertexId, y: VertexId, z: &VertexSet) -> Result<bool> {
    Ok(is_cut(h, a, y, z)? && z.len() == min_cut_size(h, a, y)?)
}

/// The partial order on cuts: `z1 ⊴ z2` iff `y ⊥ z2\z1 | z1` and
/// `a ⊥ z1\z2 | z2` in `h`. On adjustment sets it implies that `z1` yields
/// an estimator variance no larger than `z2`, for every law and policy.
pub fn cut_partial_order(
    h: &UGraph,
    a: VertexId,
    y: VertexId,
    z1: &VertexSet,
    z2: &VertexSet,
) -> Result<bool> {
    require_cut(h, a, y, z1)?;
    require_cut(h, a, y, z2)?;
    let y_side = h.separated(&VertexSet::singleton(y), &z2.difference(z1), z1)?;
    if !y_side {
        return Ok(false);
    }
    h.separated(&VertexSet::singleton(a), &z1.difference(z2), z2)
}

/// Lattice meet of two minimal (or two minimum) cuts: the boundary of the
/// component of `y` once `z1 ∪ z2` is removed. The result is contained in
/// `z1 ∪ z2` and sits below both in the cut order.
pub fn cut_meet(
    h: &UGraph,
    a: VertexId,
    y: VertexId,
    z1: &VertexSet,
    z2: &VertexSet,
) -> Result<VertexSet> {
    require_cut(h, a, y, z1)?;
    require_cut(h, a, y, z2)?;
    let comp = h.connected_component(&z1.union(z2), y)?;
    h.boundary(&comp)
}
