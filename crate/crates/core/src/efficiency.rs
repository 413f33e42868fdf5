//! The adjustment efficiency graph: an undirected graph in which A-Y vertex
//! cuts correspond exactly to observable dynamic adjustment sets, so every
//! optimality question reduces to a cut problem.
//!
//! `H0` is the moralized proper back-door graph restricted to the ancestral
//! closure of `{a, y} ∪ l`. `H1` is obtained from `H0` by deleting the
//! ignorable vertices (hidden or forbidden ancestors), reconnecting across
//! them, and wiring every policy covariate to both `a` and `y`.

use crate::adjustment::{forbidden_set, proper_backdoor_graph, Query};
use crate::error::{Error, Result};
use crate::graph::{Dag, UGraph, VertexId, VertexSet};

#[derive(Debug, Clone)]
pub struct EfficiencyGraph {
    h0: UGraph,
    h1: UGraph,
    ignore: VertexSet,
    h0_to_dag: Vec<VertexId>,
    h1_to_dag: Vec<VertexId>,
    a_h1: VertexId,
    y_h1: VertexId,
    l_h1: VertexSet,
}

/// Ancestral closure of `{a, y} ∪ l` in `g`.
pub fn ancestral_closure(g: &Dag, q: &Query) -> VertexSet {
    let seed: VertexSet = [q.a(), q.y()].into_iter().chain(q.l().iter()).collect();
    g.ancestors(&seed).expect("query is validated")
}

/// Vertices dropped when passing from `H0` to `H1`: ancestors other than
/// `a`, `y` that are unobservable or forbidden.
pub fn ignore_set(g: &Dag, q: &Query) -> VertexSet {
    let an = ancestral_closure(g, q);
    let mut core = an.clone();
    core.remove(q.a());
    core.remove(q.y());
    let n_complement = g.all_vertices().difference(q.n());
    core.intersection(&n_complement.union(&forbidden_set(g, q)))
}

/// Moralized proper back-door graph on the ancestral closure, relabeled
/// densely. Vertex labels carry over from the DAG.
pub fn build_h0(g: &Dag, q: &Query) -> UGraph {
    let an = ancestral_closure(g, q);
    let pbd = proper_backdoor_graph(g, q);
    let sub = pbd.induced_subgraph(&an).expect("ancestral ids are valid");
    sub.moralize()
}

/// Full efficiency-graph construction.
///
/// The contraction step can produce cliques quadratic in the graph size, so
/// edges accumulate in a bitset adjacency rather than an edge list.
pub fn build_h1(g: &Dag, q: &Query) -> EfficiencyGraph {
    let an = ancestral_closure(g, q);
    let h0_to_dag: Vec<VertexId> = an.iter().collect();
    let h0 = build_h0(g, q);
    let ignore = ignore_set(g, q);

    let n0 = h0.vertex_count();
    let to_h0 = |dag_id: VertexId| -> VertexId {
        h0_to_dag
            .binary_search(&dag_id)
            .expect("vertex is ancestral")
    };
    let mut is_ignored = vec![false; n0];
    for dag_id in ignore.iter() {
        is_ignored[to_h0(dag_id)] = true;
    }
    let keep: Vec<VertexId> = (0..n0).filter(|&v| !is_ignored[v]).collect();
    let mut h1_of_h0 = vec![usize::MAX; n0];
    for (i, &v) in keep.iter().enumerate() {
        h1_of_h0[v] = i;
    }
    let h1_to_dag: Vec<VertexId> = keep.iter().map(|&v| h0_to_dag[v]).collect();

    let n1 = keep.len();
    let words = n1.div_ceil(64);
    let mut bits = vec![0u64; n1 * words];
    let link = |bits: &mut [u64], u: usize, v: usize| {
        bits[u * words + v / 64] |= 1 << (v % 64);
        bits[v * words + u / 64] |= 1 << (u % 64);
    };

    // Surviving H0 edges.
    for (u1, &u0) in keep.iter().enumerate() {
        for &v0 in h0.neighbors(u0) {
            if v0 > u0 && !is_ignored[v0] {
                link(&mut bits, u1, h1_of_h0[v0]);
            }
        }
    }

    // Link every pair of survivors touching a common component of the
    // ignored subgraph; equivalent to adding an edge whenever an H0 path
    // through ignored vertices connects them.
    let mut comp_seen = vec![false; n0];
    let mut attached_mark = vec![false; n1];
    for s in 0..n0 {
        if !is_ignored[s] || comp_seen[s] {
            continue;
        }
        let mut stack = vec![s];
        comp_seen[s] = true;
        let mut attached: Vec<usize> = Vec::new();
        while let Some(v) = stack.pop() {
            for &w in h0.neighbors(v) {
                if is_ignored[w] {
                    if !comp_seen[w] {
                        comp_seen[w] = true;
                        stack.push(w);
                    }
                } else if !attached_mark[h1_of_h0[w]] {
                    attached_mark[h1_of_h0[w]] = true;
                    attached.push(h1_of_h0[w]);
                }
            }
        }
        for i in 0..attached.len() {
            for j in i + 1..attached.len() {
                link(&mut bits, attached[i], attached[j]);
            }
        }
        for &v in &attached {
            attached_mark[v] = false;
        }
    }

    // Policy covariates are wired to both endpoints.
    let a_h1 = h1_of_h0[to_h0(q.a())];
    let y_h1 = h1_of_h0[to_h0(q.y())];
    let l_h1: VertexSet = q.l().iter().map(|lv| h1_of_h0[to_h0(lv)]).collect();
    for lv in l_h1.iter() {
        link(&mut bits, a_h1, lv);
        link(&mut bits, y_h1, lv);
    }

    let adj: Vec<Vec<VertexId>> = (0..n1)
        .map(|u| {
            let mut list = Vec::new();
            for (wi, &word) in bits[u * words..(u + 1) * words].iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    list.push(wi * 64 + w.trailing_zeros() as usize);
                    w &= w - 1;
                }
            }
            list
        })
        .collect();
    let labels: Vec<String> = h1_to_dag.iter().map(|&v| g.label(v).to_string()).collect();
    let h1 = UGraph::from_adjacency(labels, adj);

    EfficiencyGraph {
        h0,
        h1,
        ignore,
        h0_to_dag,
        h1_to_dag,
        a_h1,
        y_h1,
        l_h1,
    }
}

impl EfficiencyGraph {
    pub fn h0(&self) -> &UGraph {
        &self.h0
    }

    pub fn h1(&self) -> &UGraph {
        &self.h1
    }

    /// Ignored vertices, in DAG ids.
    pub fn ignore(&self) -> &VertexSet {
        &self.ignore
    }

    /// Treatment position in `h1`.
    pub fn a(&self) -> VertexId {
        self.a_h1
    }

    /// Outcome position in `h1`.
    pub fn y(&self) -> VertexId {
        self.y_h1
    }

    /// Policy covariates in `h1` ids.
    pub fn l(&self) -> &VertexSet {
        &self.l_h1
    }

    /// DAG id of an `h1` vertex.
    pub fn dag_id(&self, h1_id: VertexId) -> VertexId {
        self.h1_to_dag[h1_id]
    }

    pub fn to_dag_ids(&self, s: &VertexSet) -> VertexSet {
        s.iter().map(|v| self.h1_to_dag[v]).collect()
    }

    /// Translates DAG ids into `h1` ids; `None` if any vertex was dropped.
    pub fn to_h1_ids(&self, s: &VertexSet) -> Option<VertexSet> {
        let mut out = VertexSet::new();
        for v in s.iter() {
            match self.h1_to_dag.binary_search(&v) {
                Ok(pos) => out.insert(pos),
                Err(_) => return None,
            }
        }
        Some(out)
    }

    /// Vertex set of `h1` in DAG ids.
    pub fn vertices_dag(&self) -> VertexSet {
        self.h1_to_dag.iter().copied().collect()
    }

    /// Separation of `u`, `v` (DAG ids) given `w` in both graphs. The two
    /// answers must agree whenever `w` contains all policy covariates; that
    /// containment is enforced here as a precondition.
    pub fn preserves_separation(
        &self,
        u: VertexId,
        v: VertexId,
        w: &VertexSet,
    ) -> Result<(bool, bool)> {
        let uv = VertexSet::from([u, v]);
        let all = self.to_h1_ids(&uv.union(w)).ok_or_else(|| {
            Error::Precondition("vertices must belong to the efficiency graph".into())
        })?;
        let _ = all;
        let l_dag = self.to_dag_ids(&self.l_h1);
        if !l_dag.is_subset(w) {
            return Err(Error::Precondition(
                "conditioning set must contain every policy covariate".into(),
            ));
        }
        if w.contains(u) || w.contains(v) {
            return Err(Error::Overlap("w must not contain u or v".into()));
        }
        let to_h0 = |s: &VertexSet| -> VertexSet {
            s.iter()
                .map(|x| {
                    self.h0_to_dag
                        .binary_search(&x)
                        .expect("vertex is ancestral")
                })
                .collect()
        };
        let u0 = to_h0(&VertexSet::singleton(u));
        let v0 = to_h0(&VertexSet::singleton(v));
        let w0 = to_h0(w);
        let sep0 = self.h0.separated(&u0, &v0, &w0)?;
        let u1 = self.to_h1_ids(&VertexSet::singleton(u)).unwrap();
        let v1 = self.to_h1_ids(&VertexSet::singleton(v)).unwrap();
        let w1 = self.to_h1_ids(w).unwrap();
        let sep1 = self.h1.separated(&u1, &v1, &w1)?;
        Ok((sep0, sep1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn edge_names(h: &UGraph) -> Vec<(String, String)> {
        h.edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (h.label(u).to_string(), h.label(v).to_string());
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    fn sorted(mut v: Vec<(String, String)>) -> Vec<(String, String)> {
        v.sort();
        v
    }

    fn pairs(raw: &[(&str, &str)]) -> Vec<(String, String)> {
        sorted(
            raw.iter()
                .map(|&(a, b)| {
                    let (a, b) = (a.to_string(), b.to_string());
                    if a < b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn h0_mediator_example() {
        let (g, q) = fixtures::mediator_with_proxies();
        let h0 = build_h0(&g, &q);
        let expected = pairs(&[
            ("F", "A"),
            ("L", "A"),
            ("L", "F"),
            ("L", "U"),
            ("U", "F"),
            ("U", "Y"),
            ("M", "Y"),
            ("M", "U"),
        ]);
        assert_eq!(sorted(edge_names(&h0)), expected);
    }

    #[test]
    fn h0_instrument_example() {
        let (g, q) = fixtures::instrument_only();
        let h0 = build_h0(&g, &q);
        assert_eq!(h0.vertex_count(), 4);
        assert_eq!(sorted(edge_names(&h0)), pairs(&[("Z1", "A"), ("U", "Y")]));
    }

    #[test]
    fn h0_hidden_outcome_cause_example() {
        let (g, q) = fixtures::hidden_outcome_cause();
        let h0 = build_h0(&g, &q);
        assert_eq!(sorted(edge_names(&h0)), pairs(&[("L", "A"), ("U", "Y")]));
    }

    #[test]
    fn h1_mediator_example() {
        let (g, q) = fixtures::mediator_with_proxies();
        let eg = build_h1(&g, &q);
        assert_eq!(
            eg.ignore(),
            &VertexSet::from([g.index_of("M").unwrap(), g.index_of("U").unwrap()])
        );
        let expected = pairs(&[("F", "A"), ("L", "A"), ("L", "F"), ("L", "Y"), ("F", "Y")]);
        assert_eq!(sorted(edge_names(eg.h1())), expected);
    }

    #[test]
    fn h1_instrument_example() {
        let (g, q) = fixtures::instrument_only();
        let eg = build_h1(&g, &q);
        assert_eq!(eg.h1().vertex_count(), 3);
        assert_eq!(sorted(edge_names(eg.h1())), pairs(&[("Z1", "A")]));
    }

    #[test]
    fn h1_equals_h0_when_nothing_is_ignored() {
        let (g, q) = fixtures::parent_fan(4);
        let eg = build_h1(&g, &q);
        assert!(eg.ignore().is_empty());
        assert_eq!(sorted(edge_names(eg.h0())), sorted(edge_names(eg.h1())));
    }

    #[test]
    fn h1_fan_example_exact_edges() {
        // K = 3: every Wi touches T (i <= 3), Y (all), and every other Wj;
        // T touches A. In particular no T-W4 and no A-Y edge.
        let (g, q) = fixtures::parent_fan(3);
        let eg = build_h1(&g, &q);
        let expected = pairs(&[
            ("W1", "T"),
            ("W2", "T"),
            ("W3", "T"),
            ("W1", "Y"),
            ("W2", "Y"),
            ("W3", "Y"),
            ("W4", "Y"),
            ("W1", "W2"),
            ("W1", "W3"),
            ("W1", "W4"),
            ("W2", "W3"),
            ("W2", "W4"),
            ("W3", "W4"),
            ("T", "A"),
        ]);
        assert_eq!(sorted(edge_names(eg.h1())), expected);
        let _ = g;
    }

    #[test]
    fn h1_vertex_set_formula() {
        for (g, q) in [
            fixtures::mediator_with_proxies(),
            fixtures::instrument_only(),
            fixtures::hidden_outcome_cause(),
            fixtures::parent_fan(3),
        ] {
            let eg = build_h1(&g, &q);
            let an = ancestral_closure(&g, &q);
            let mut forb_rest = forbidden_set(&g, &q);
            forb_rest.remove(q.a());
            forb_rest.remove(q.y());
            let expected = an.intersection(q.n()).difference(&forb_rest);
            assert_eq!(eg.vertices_dag(), expected);
        }
    }

    #[test]
    fn policy_covariates_are_wired_to_both_endpoints() {
        let (g, q) = fixtures::hidden_outcome_cause();
        let eg = build_h1(&g, &q);
        for lv in eg.l().iter() {
            assert!(eg.h1().has_edge(eg.a(), lv));
            assert!(eg.h1().has_edge(eg.y(), lv));
        }
        let _ = g;
    }

    #[test]
    fn preserves_separation_examples() {
        let (g, q) = fixtures::mediator_with_proxies();
        let eg = build_h1(&g, &q);
        let w: VertexSet = [g.index_of("L").unwrap(), g.index_of("F").unwrap()].into();
        let (s0, s1) = eg.preserves_separation(q.a(), q.y(), &w).unwrap();
        assert!(s0 && s1);

        let (g4, q4) = fixtures::hidden_outcome_cause();
        let eg4 = build_h1(&g4, &q4);
        let w4 = VertexSet::singleton(g4.index_of("L").unwrap());
        let (s0, s1) = eg4.preserves_separation(q4.a(), q4.y(), &w4).unwrap();
        assert!(s0 && s1);
    }

    #[test]
    fn preserves_separation_requires_policy_in_conditioning_set() {
        let (g, q) = fixtures::mediator_with_proxies();
        let eg = build_h1(&g, &q);
        let w = VertexSet::singleton(g.index_of("F").unwrap());
        assert!(matches!(
            eg.preserves_separation(q.a(), q.y(), &w),
            Err(Error::Precondition(_))
        ));
    }
}
