//! Shared brute-force oracles for the property suites. Everything here is
//! deliberately naive and independent of the library's implementation paths.

#![allow(dead_code)]

use adjust_core::adjustment::{is_adjustment_set, Query};
use adjust_core::graph::{Dag, UGraph, VertexId, VertexSet};

/// All simple paths between `from` and `to` over the skeleton of `g`.
/// Exponential; callers keep graphs small.
pub fn all_simple_paths(g: &Dag, from: VertexId, to: VertexId) -> Vec<Vec<VertexId>> {
    let n = g.vertex_count();
    let mut neighbors: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    for l in &mut neighbors {
        l.sort_unstable();
        l.dedup();
    }
    let mut paths = Vec::new();
    let mut current = vec![from];
    let mut on_path = vec![false; n];
    on_path[from] = true;
    fn dfs(
        v: VertexId,
        to: VertexId,
        neighbors: &[Vec<VertexId>],
        current: &mut Vec<VertexId>,
        on_path: &mut Vec<bool>,
        paths: &mut Vec<Vec<VertexId>>,
    ) {
        if v == to {
            paths.push(current.clone());
            return;
        }
        for &w in &neighbors[v] {
            if !on_path[w] {
                on_path[w] = true;
                current.push(w);
                dfs(w, to, neighbors, current, on_path, paths);
                current.pop();
                on_path[w] = false;
            }
        }
    }
    dfs(from, to, &neighbors, &mut current, &mut on_path, &mut paths);
    paths
}

/// Textbook blocking test: a path is blocked by `z` iff some non-collider on
/// it is in `z`, or some collider has no descendant in `z`.
pub fn path_blocked(g: &Dag, path: &[VertexId], z: &VertexSet) -> bool {
    for i in 1..path.len().saturating_sub(1) {
        let v = path[i];
        let is_collider = g.has_edge(path[i - 1], v) && g.has_edge(path[i + 1], v);
        if is_collider {
            let de = g.descendants(&VertexSet::singleton(v)).unwrap();
            if de.intersection(z).is_empty() {
                return true;
            }
        } else if z.contains(v) {
            return true;
        }
    }
    false
}

/// Path-enumeration d-separation for single vertices. Keep graphs at seven
/// vertices or fewer; the path count explodes beyond that.
pub fn d_separated_by_paths(g: &Dag, u: VertexId, w: VertexId, z: &VertexSet) -> bool {
    assert!(
        g.vertex_count() <= 7,
        "path enumeration is guarded to small graphs"
    );
    all_simple_paths(g, u, w)
        .iter()
        .all(|p| path_blocked(g, p, z))
}

/// Every subset of `pool`, as sorted sets.
pub fn subsets_of(pool: &VertexSet) -> Vec<VertexSet> {
    let items: Vec<VertexId> = pool.iter().collect();
    assert!(items.len() <= 20);
    (0u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|&(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// All a-y vertex cuts of `h`, by exhaustive enumeration.
pub fn all_cuts_brute(h: &UGraph, a: VertexId, y: VertexId) -> Vec<VertexSet> {
    let pool: VertexSet = (0..h.vertex_count())
        .filter(|&v| v != a && v != y)
        .collect();
    subsets_of(&pool)
        .into_iter()
        .filter(|z| h.u_separated(a, y, z).unwrap())
        .collect()
}

/// Minimum a-y cut size by exhaustive enumeration; `None` when no finite
/// cut exists (the endpoints are adjacent).
pub fn min_cut_brute(h: &UGraph, a: VertexId, y: VertexId) -> Option<usize> {
    all_cuts_brute(h, a, y).iter().map(|z| z.len()).min()
}

/// Inclusion-minimal members of a family of sets.
pub fn minimal_members(sets: &[VertexSet]) -> Vec<VertexSet> {
    sets.iter()
        .filter(|z| {
            !sets
                .iter()
                .any(|other| other.len() < z.len() && other.is_subset(z))
        })
        .cloned()
        .collect()
}

/// Smallest-cardinality members of a family of sets.
pub fn minimum_members(sets: &[VertexSet]) -> Vec<VertexSet> {
    let best = sets.iter().map(|z| z.len()).min();
    sets.iter()
        .filter(|z| Some(z.len()) == best)
        .cloned()
        .collect()
}

/// All valid adjustment sets found by brute force over subsets of the
/// observables containing the policy covariates.
pub fn valid_sets_brute(g: &Dag, q: &Query) -> Vec<VertexSet> {
    let mut pool = q.n().clone();
    pool.remove(q.a());
    pool.remove(q.y());
    subsets_of(&pool)
        .into_iter()
        .filter(|z| q.l().is_subset(z) && is_adjustment_set(g, q, z).unwrap().valid())
        .collect()
}
