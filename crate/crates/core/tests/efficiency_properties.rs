//! Properties of the efficiency-graph construction: separation preservation
//! between the two stages, the cut/validity correspondence, and equivalence
//! of the component-contraction step with a literal path-existence builder.

mod common;

use adjust_core::adjustment::{exists_adjustment, is_adjustment_set, Query};
use adjust_core::efficiency::{ancestral_closure, build_h0, build_h1, ignore_set};
use adjust_core::graph::{Dag, UGraph, VertexId, VertexSet};
use adjust_core::random::random_admissible_instance;

/// Reference construction: connect surviving pairs whenever some path in the
/// moralized back-door graph runs entirely through ignored vertices.
fn h1_by_path_existence(g: &Dag, q: &Query) -> UGraph {
    let an = ancestral_closure(g, q);
    let h0 = build_h0(g, q);
    let an_ids: Vec<VertexId> = an.iter().collect();
    let to_h0 = |dag: VertexId| an_ids.binary_search(&dag).unwrap();
    let ignore = ignore_set(g, q);
    let ignore_h0: VertexSet = ignore.iter().map(to_h0).collect();
    let survivors: Vec<VertexId> = (0..h0.vertex_count())
        .filter(|v| !ignore_h0.contains(*v))
        .collect();

    let connected_through_ignored = |u: VertexId, v: VertexId| -> bool {
        // BFS from u's ignored neighbors, moving only through ignored
        // vertices, looking for one adjacent to v.
        let mut stack: Vec<VertexId> = h0
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&x| ignore_h0.contains(x))
            .collect();
        let mut seen: Vec<bool> = vec![false; h0.vertex_count()];
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(x) = stack.pop() {
            if h0.neighbors(x).binary_search(&v).is_ok() {
                return true;
            }
            for &w in h0.neighbors(x) {
                if ignore_h0.contains(w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    };

    let mut edges = Vec::new();
    for (i, &u) in survivors.iter().enumerate() {
        for &v in survivors.iter().skip(i + 1) {
            if h0.has_edge(u, v) || connected_through_ignored(u, v) {
                edges.push((i, survivors.iter().position(|&x| x == v).unwrap()));
            }
        }
    }
    let labels: Vec<String> = survivors.iter().map(|&v| h0.label(v).to_string()).collect();
    let mut h1 = UGraph::new(labels, &edges).unwrap();
    let pos = |dag: VertexId| {
        let h0_id = to_h0(dag);
        survivors.iter().position(|&x| x == h0_id).unwrap()
    };
    let l_edges: Vec<(VertexId, VertexId)> = q
        .l()
        .iter()
        .flat_map(|lv| [(pos(q.a()), pos(lv)), (pos(q.y()), pos(lv))])
        .collect();
    h1 = h1.with_extra_edges(&l_edges).unwrap();
    h1
}

#[test]
fn contraction_step_matches_path_existence_builder() {
    for seed in 0..60u64 {
        let (g, q) = random_admissible_instance(seed, 8, 3);
        let eg = build_h1(&g, &q);
        let literal = h1_by_path_existence(&g, &q);
        assert_eq!(eg.h1().labels(), literal.labels(), "seed {seed}");
        assert_eq!(eg.h1().edges(), literal.edges(), "seed {seed}");
    }
}

#[test]
fn separation_preserved_between_stages_exhaustively() {
    for seed in 0..25u64 {
        let (g, q) = random_admissible_instance(seed, 7, 2);
        let eg = build_h1(&g, &q);
        let verts = eg.vertices_dag();
        let ids: Vec<VertexId> = verts.iter().collect();
        for (i, &u) in ids.iter().enumerate() {
            for &v in ids.iter().skip(i + 1) {
                let pool: VertexSet = verts.iter().filter(|&x| x != u && x != v).collect();
                if !q.l().is_subset(&pool) {
                    continue;
                }
                let free: Vec<VertexId> = pool.difference(q.l()).iter().collect();
                for mask in 0u32..(1 << free.len()) {
                    let mut w = q.l().clone();
                    for (bit, &x) in free.iter().enumerate() {
                        if mask & (1 << bit) != 0 {
                            w.insert(x);
                        }
                    }
                    let (s0, s1) = eg.preserves_separation(u, v, &w).unwrap();
                    assert_eq!(
                        s0, s1,
                        "seed {seed}: stages disagree for ({u},{v}) given {w:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn admissible_pairs_leave_endpoints_non_adjacent() {
    for seed in 0..80u64 {
        let (g, q) = random_admissible_instance(seed, 9, 3);
        assert!(exists_adjustment(&g, &q));
        let eg = build_h1(&g, &q);
        assert!(!eg.h1().has_edge(eg.a(), eg.y()), "seed {seed}");
    }
}

#[test]
fn every_cut_is_a_valid_adjustment_set() {
    for seed in 0..40u64 {
        let (g, q) = random_admissible_instance(seed, 7, 2);
        let eg = build_h1(&g, &q);
        for cut in common::all_cuts_brute(eg.h1(), eg.a(), eg.y()) {
            let dag_set = eg.to_dag_ids(&cut);
            assert!(
                is_adjustment_set(&g, &q, &dag_set).unwrap().valid(),
                "seed {seed}: cut {dag_set:?} fails validity"
            );
        }
    }
}

#[test]
fn validity_equals_cut_over_the_ancestral_closure() {
    for seed in 0..40u64 {
        let (g, q) = random_admissible_instance(seed, 7, 2);
        let eg = build_h1(&g, &q);
        let mut pool = ancestral_closure(&g, &q);
        pool.remove(q.a());
        pool.remove(q.y());
        for z in common::subsets_of(&pool) {
            let valid = is_adjustment_set(&g, &q, &z).unwrap().valid();
            let is_cut = match eg.to_h1_ids(&z) {
                Some(z_h1) => eg.h1().u_separated(eg.a(), eg.y(), &z_h1).unwrap(),
                None => false, // touches an ignored vertex, cannot be a cut
            };
            assert_eq!(valid, is_cut, "seed {seed}: disagreement on {z:?}");
        }
    }
}
