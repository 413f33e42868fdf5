//! Seeded generators: random discrete models, random policies, and random
//! graph instances. Everything is deterministic in its seed.

use crate::adjustment::{exists_adjustment, Query};
use crate::graph::{Dag, UGraph, VertexId, VertexSet};
use crate::oracle::{Cpt, DiscreteBn, Policy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    // Symmetric Dirichlet(1, ..., 1) via normalized exponentials.
    let mut row: Vec<f64> = (0..k).map(|_| -f64::ln(1.0 - rng.gen::<f64>())).collect();
    let sum: f64 = row.iter().sum();
    for p in &mut row {
        *p /= sum;
    }
    row
}

/// A random discrete model over `dag` with the given per-vertex state count.
///
/// Each CPT row is a symmetric Dirichlet draw mixed with a uniform floor so
/// that every entry is at least `epsilon`, which keeps all conditional
/// treatment probabilities bounded away from zero. State values are uniform
/// on `[0, 1]` for every vertex, so any vertex can serve as the outcome.
pub fn random_bn(dag: &Dag, seed: u64, cardinality: usize, epsilon: f64) -> DiscreteBn {
    assert!(cardinality >= 2, "need at least two states per vertex");
    assert!(
        epsilon > 0.0 && epsilon < 1.0 / cardinality as f64,
        "epsilon must lie in (0, 1/cardinality)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dag.vertex_count();
    let cards = vec![cardinality; n];
    let slack = 1.0 - cardinality as f64 * epsilon;
    let mut cpts = Vec::with_capacity(n);
    for v in 0..n {
        let row_count: usize = dag.parents(v).iter().map(|_| cardinality).product();
        let rows: Vec<Vec<f64>> = (0..row_count)
            .map(|_| {
                let mut row = dirichlet_row(&mut rng, cardinality);
                let mut sum = 0.0;
                for p in &mut row {
                    *p = epsilon + slack * *p;
                    sum += *p;
                }
                // Guard against drift so validation's 1e-12 check holds.
                for p in &mut row {
                    *p /= sum;
                }
                row
            })
            .collect();
        cpts.push(Cpt::new(rows));
    }
    let state_values: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..cardinality).map(|_| rng.gen::<f64>()).collect())
        .collect();
    DiscreteBn::new(dag.clone(), cards, cpts, Some(state_values)).expect("generated model is valid")
}

/// A random stochastic policy that genuinely depends on the covariates.
pub fn random_policy(bn: &DiscreteBn, q: &Query, seed: u64) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = q.l().clone();
    let l_cards: Vec<usize> = l.iter().map(|v| bn.cardinality(v)).collect();
    let a_card = bn.cardinality(q.a());
    let rows: usize = l_cards.iter().product::<usize>().max(1);
    let rows: Vec<Vec<f64>> = (0..rows).map(|_| dirichlet_row(&mut rng, a_card)).collect();
    Policy::new(l, l_cards, a_card, rows).expect("generated policy is valid")
}

/// A random DAG on `n` vertices labeled `V0..V{n-1}`; ids are a topological
/// order, and each forward pair is an edge with probability `edge_prob`.
pub fn random_dag(seed: u64, n: usize, edge_prob: f64, hidden: &VertexSet) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    Dag::new(labels, &edges, hidden).expect("forward edges cannot form a cycle")
}

/// A random undirected graph on `n` vertices.
pub fn random_ugraph(seed: u64, n: usize, edge_prob: f64) -> UGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    UGraph::new(labels, &edges).expect("generated edges are valid")
}

/// A random DAG plus an admissible query on it: the treatment is an
/// observable ancestor of the outcome, the policy covariates are observable
/// non-descendants, and a valid observable adjustment set exists.
pub fn random_admissible_instance(
    seed: u64,
    max_observable: usize,
    max_hidden: usize,
) -> (Dag, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let n_obs = rng.gen_range(4..=max_observable.max(4));
        let n_hid = rng.gen_range(0..=max_hidden);
        let n = n_obs + n_hid;
        let edge_prob = rng.gen_range(0.25..0.55);
        let mut ids: Vec<VertexId> = (0..n).collect();
        ids.shuffle(&mut rng);
        let hidden: VertexSet = ids[..n_hid].iter().copied().collect();

        let labels: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(edge_prob) {
                    edges.push((i, j));
                }
            }
        }
        let g = match Dag::new(labels, &edges, &hidden) {
            Ok(g) => g,
            Err(_) => continue,
        };

        let observable = g.observable_set();
        let mut pairs = Vec::new();
        for y in observable.iter() {
            let an = g.ancestors(&VertexSet::singleton(y)).expect("valid ids");
            for a in an.iter() {
                if a != y && observable.contains(a) {
                    pairs.push((a, y));
                }
            }
        }
        let Some(&(a, y)) = pairs.choose(&mut rng) else {
            continue;
        };

        let de_a = g.descendants(&VertexSet::singleton(a)).expect("valid ids");
        let pool: Vec<VertexId> = observable
            .difference(&de_a)
            .iter()
            .filter(|&v| v != y)
            .collect();
        let l_size = rng.gen_range(0..=pool.len().min(2));
        let mut pool = pool;
        pool.shuffle(&mut rng);
        let l: VertexSet = pool[..l_size].iter().copied().collect();

        let Ok(q) = Query::new(&g, a, y, l, None) else {
            continue;
        };
        if exists_adjustment(&g, &q) {
            return (g, q);
        }
    }
    panic!("no admissible instance found for seed {seed}");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_bn_is_deterministic_and_floored() {
        let (g, _) = crate::fixtures::instrument_only();
        let b1 = random_bn(&g, 7, 3, 0.05);
        let b2 = random_bn(&g, 7, 3, 0.05);
        for v in 0..g.vertex_count() {
            assert_eq!(b1.cpt(v).rows(), b2.cpt(v).rows());
            assert_eq!(b1.state_values(v), b2.state_values(v));
            for row in b1.cpt(v).rows() {
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert!(
                    row.iter().all(|&p| p >= 0.05 - 1e-12),
                    "floor violated: {row:?}"
                );
            }
        }
        let b3 = random_bn(&g, 8, 3, 0.05);
        assert_ne!(b1.cpt(0).rows(), b3.cpt(0).rows());
    }

    #[test]
    fn random_instances_are_admissible_and_reproducible() {
        for seed in 0..10 {
            let (g, q) = random_admissible_instance(seed, 8, 2);
            assert!(exists_adjustment(&g, &q));
            let (g2, q2) = random_admissible_instance(seed, 8, 2);
            assert_eq!(g, g2);
            assert_eq!(q, q2);
        }
    }
}
