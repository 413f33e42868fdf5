//! Small worked-example graphs shared by the test suites and the bundled
//! CLI example files.

use crate::adjustment::Query;
use crate::graph::{Dag, VertexSet};

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Treatment with a mediator M, a hidden cause U of the outcome, and two
/// observed proxies F and L; the policy depends on L.
///
/// Nodes: A, F, U (hidden), M, Y, L. Edges: F->A, L->A, L->F, U->F, U->Y,
/// A->M, M->Y.
pub fn mediator_with_proxies() -> (Dag, Query) {
    let g = Dag::new(
        labels(&["A", "F", "U", "M", "Y", "L"]),
        &[(1, 0), (5, 0), (5, 1), (2, 1), (2, 4), (0, 3), (3, 4)],
        &VertexSet::singleton(2),
    )
    .unwrap();
    let q = Query::new(&g, 0, 4, VertexSet::singleton(5), None).unwrap();
    (g, q)
}

/// A fan of k+1 parents of Y, the first k of which also cause T, which in
/// turn decides A. Everything is observed and the policy is static.
///
/// Nodes: W1..W{k+1}, T, A, Y. Edges: Wi->T and Wi->Y for i <= k,
/// W{k+1}->Y, T->A, A->Y.
pub fn parent_fan(k: usize) -> (Dag, Query) {
    assert!(k >= 1);
    let mut names: Vec<String> = (1..=k + 1).map(|i| format!("W{i}")).collect();
    names.extend(["T".to_string(), "A".to_string(), "Y".to_string()]);
    let t = k + 1;
    let a = k + 2;
    let y = k + 3;
    let mut edges = Vec::new();
    for w in 0..k {
        edges.push((w, t));
        edges.push((w, y));
    }
    edges.push((k, y));
    edges.push((t, a));
    edges.push((a, y));
    let g = Dag::new(names, &edges, &VertexSet::new()).unwrap();
    let q = Query::new(&g, a, y, VertexSet::new(), None).unwrap();
    (g, q)
}

/// An instrument Z1 for A, plus a proxy Z2 driven by Z1 and a hidden cause
/// U of the outcome. No globally optimal observable set exists here.
///
/// Nodes: A, Y, Z1, Z2, U (hidden). Edges: Z1->A, Z1->Z2, U->Y, U->Z2, A->Y.
pub fn instrument_only() -> (Dag, Query) {
    let g = Dag::new(
        labels(&["A", "Y", "Z1", "Z2", "U"]),
        &[(2, 0), (2, 3), (4, 1), (4, 3), (0, 1)],
        &VertexSet::singleton(4),
    )
    .unwrap();
    let q = Query::new(&g, 0, 1, VertexSet::new(), None).unwrap();
    (g, q)
}

/// A hidden cause U of the outcome with an observed proxy F that is not an
/// ancestor of anything relevant; the policy depends on L.
///
/// Nodes: A, Y, U (hidden), L, F. Edges: L->A, U->F, U->Y, A->Y.
pub fn hidden_outcome_cause() -> (Dag, Query) {
    let g = Dag::new(
        labels(&["A", "Y", "U", "L", "F"]),
        &[(3, 0), (2, 4), (2, 1), (0, 1)],
        &VertexSet::singleton(2),
    )
    .unwrap();
    let q = Query::new(&g, 0, 1, VertexSet::singleton(3), None).unwrap();
    (g, q)
}
