//! Semantic ground-truth checks: the graphical validity criterion against
//! exact policy-value equality on random discrete laws, the variance
//! orderings promised by the graphical comparisons, and the two variance
//! identities on searched precondition-satisfying pairs.

mod common;

use adjust_core::adjustment::{graphical_compare, is_adjustment_set, Comparison, Query};
use adjust_core::cuts::{cut_partial_order, is_minimal_cut};
use adjust_core::efficiency::build_h1;
use adjust_core::graph::{Dag, VertexId, VertexSet};
use adjust_core::oracle::{
    adjustment_value, deletion_identity, enumerate_adjustment_sets, gformula_value,
    influence_variance, joint_distribution, supplementation_identity, DiscreteBn, EnumerationMode,
    Policy,
};
use adjust_core::random::{random_admissible_instance, random_bn, random_policy};

fn policies(bn: &DiscreteBn, q: &Query, seed: u64) -> Vec<Policy> {
    let mut out: Vec<Policy> = (0..bn.cardinality(q.a()))
        .map(|a| Policy::point_mass(bn, q, a))
        .collect();
    out.push(random_policy(bn, q, seed));
    out
}

#[test]
fn validity_matches_exact_law_equality() {
    // Valid sets reproduce the policy value on every law; invalid sets must
    // betray themselves on some law within the sampling budget.
    for seed in 0..12u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let mut pool = q.n().clone();
        pool.remove(q.a());
        pool.remove(q.y());
        for z in common::subsets_of(&pool) {
            if !q.l().is_subset(&z) {
                continue;
            }
            let valid = is_adjustment_set(&g, &q, &z).unwrap().valid();
            if valid {
                for law in 0..5u64 {
                    let bn = random_bn(&g, seed * 100 + law, 2, 0.05);
                    for pi in policies(&bn, &q, seed + law) {
                        let chi_z = adjustment_value(&bn, &q, &pi, &z).unwrap();
                        let chi = gformula_value(&bn, &q, &pi).unwrap();
                        assert!(
                            (chi_z - chi).abs() <= 1e-10,
                            "seed {seed}: valid {z:?} mismatched ({chi_z} vs {chi})"
                        );
                    }
                }
            } else {
                let mut exposed = false;
                'laws: for law in 0..50u64 {
                    let bn = random_bn(&g, seed * 100 + law, 2, 0.05);
                    for pi in policies(&bn, &q, seed + law) {
                        let chi_z = adjustment_value(&bn, &q, &pi, &z).unwrap();
                        let chi = gformula_value(&bn, &q, &pi).unwrap();
                        if (chi_z - chi).abs() > 1e-6 {
                            exposed = true;
                            break 'laws;
                        }
                    }
                }
                assert!(
                    exposed,
                    "seed {seed}: invalid {z:?} never diverged within 50 laws"
                );
            }
        }
    }
}

#[test]
fn canonical_set_validity_matches_brute_force() {
    // Admissibility reported by the canonical-set test coincides with brute
    // force finding at least one valid set.
    use adjust_core::adjustment::{canonical_adjustment, exists_adjustment};
    use adjust_core::random::random_dag;
    for seed in 0..60u64 {
        let n = 4 + (seed as usize % 5);
        let hidden: VertexSet = if seed % 3 == 0 {
            [n - 2].into()
        } else {
            VertexSet::new()
        };
        let g = random_dag(seed.wrapping_mul(31), n, 0.4, &hidden);
        let observable = g.observable_set();
        let mut pair = None;
        'outer: for y in observable.iter() {
            let an = g.ancestors(&VertexSet::singleton(y)).unwrap();
            for a in an.iter() {
                if a != y && observable.contains(a) {
                    pair = Some((a, y));
                    break 'outer;
                }
            }
        }
        let Some((a, y)) = pair else { continue };
        let q = Query::new(&g, a, y, VertexSet::new(), None).unwrap();
        let brute_found = !common::valid_sets_brute(&g, &q).is_empty();
        assert_eq!(exists_adjustment(&g, &q), brute_found, "seed {seed}");
        let canonical_valid = is_adjustment_set(&g, &q, &canonical_adjustment(&g, &q))
            .unwrap()
            .valid();
        assert_eq!(canonical_valid, brute_found, "seed {seed}");
    }
}

#[test]
fn minimal_valid_sets_live_in_the_ancestral_closure() {
    for seed in 0..30u64 {
        let (g, q) = random_admissible_instance(seed, 7, 2);
        let an = adjust_core::efficiency::ancestral_closure(&g, &q);
        let valid = common::valid_sets_brute(&g, &q);
        for z in common::minimal_members(&valid) {
            assert!(
                z.is_subset(&an),
                "seed {seed}: minimal set {z:?} leaves the closure"
            );
        }
    }
}

#[test]
fn psi_is_mean_zero_and_decomposes_over_treatment_states() {
    for seed in 0..10u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let bn = random_bn(&g, seed + 500, 2, 0.05);
        let valid = common::valid_sets_brute(&g, &q);
        for pi in policies(&bn, &q, seed) {
            for z in &valid {
                let rep = influence_variance(&bn, &q, &pi, z).unwrap();
                assert!(rep.mean_psi.abs() <= 1e-10, "seed {seed}: psi not centered");

                // Independent pointwise reconstruction of psi and its arms.
                let joint = joint_distribution(&bn).unwrap();
                let chi = rep.chi;
                let n = g.vertex_count();
                let states_of =
                    |idx: usize| -> Vec<usize> { (0..n).map(|v| joint.state(idx, v)).collect() };
                let sub_index = |vars: &VertexSet, states: &[usize]| -> usize {
                    vars.iter()
                        .fold(0, |acc, v| acc * bn.cardinality(v) + states[v])
                };
                let a_card = bn.cardinality(q.a());
                let zi_size: usize = z
                    .iter()
                    .map(|v| bn.cardinality(v))
                    .product::<usize>()
                    .max(1);
                let mut pz = vec![0.0; zi_size];
                let mut paz = vec![0.0; zi_size * a_card];
                let mut ysum = vec![0.0; zi_size * a_card];
                for idx in 0..joint.len() {
                    let st = states_of(idx);
                    let zi = sub_index(z, &st);
                    let a = st[q.a()];
                    pz[zi] += joint.prob(idx);
                    paz[zi * a_card + a] += joint.prob(idx);
                    ysum[zi * a_card + a] += joint.prob(idx) * bn.state_values(q.y())[st[q.y()]];
                }
                let mut total_sq = 0.0;
                for idx in 0..joint.len() {
                    let p = joint.prob(idx);
                    if p == 0.0 {
                        continue;
                    }
                    let st = states_of(idx);
                    let zi = sub_index(z, &st);
                    let li = sub_index(q.l(), &st);
                    let a_obs = st[q.a()];
                    let yv = bn.state_values(q.y())[st[q.y()]];
                    let b = |a: usize| {
                        ysum[zi * a_card + a] / paz[zi * a_card + a].max(f64::MIN_POSITIVE)
                    };
                    let f_obs = paz[zi * a_card + a_obs] / pz[zi];
                    let pol_mean: f64 = (0..a_card).map(|a| pi.prob(a, li) * b(a)).sum();
                    let psi = pi.prob(a_obs, li) / f_obs * (yv - b(a_obs)) + pol_mean - chi;
                    // Arm decomposition must reproduce psi pointwise.
                    let mut sum_arms = 0.0;
                    for a in 0..a_card {
                        let ind = if a == a_obs {
                            pi.prob(a, li) / f_obs * (yv - b(a))
                        } else {
                            0.0
                        };
                        // The arm constant cancels in the sum over arms
                        // against chi_{pi,Z}; check the stochastic parts.
                        sum_arms += ind + pi.prob(a, li) * b(a);
                    }
                    assert!(
                        (sum_arms - (psi + chi)).abs() <= 1e-12,
                        "pointwise arm decomposition broke"
                    );
                    total_sq += p * psi * psi;
                }
                assert!(
                    (total_sq - rep.sigma2).abs() <= 1e-9,
                    "seed {seed}: independent sigma^2 mismatch ({total_sq} vs {})",
                    rep.sigma2
                );
            }
        }
    }
}

#[test]
fn graphical_not_worse_implies_variance_order() {
    let mut certified = 0;
    for seed in 0..12u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let valid = common::valid_sets_brute(&g, &q);
        for zg in &valid {
            for zb in &valid {
                if graphical_compare(&g, &q, zg, zb).unwrap() != Comparison::GNotWorse {
                    continue;
                }
                certified += 1;
                for law in 0..3u64 {
                    let bn = random_bn(&g, seed * 37 + law, 2, 0.05);
                    for pi in policies(&bn, &q, seed + law) {
                        let vg = influence_variance(&bn, &q, &pi, zg).unwrap().sigma2;
                        let vb = influence_variance(&bn, &q, &pi, zb).unwrap().sigma2;
                        assert!(
                            vg <= vb + 1e-9,
                            "seed {seed}: certificate violated ({vg} > {vb}) for {zg:?} vs {zb:?}"
                        );
                    }
                }
            }
        }
    }
    assert!(
        certified > 10,
        "the comparison should certify a decent number of pairs"
    );
}

#[test]
fn cut_order_implies_variance_order() {
    for seed in 0..10u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let eg = build_h1(&g, &q);
        let h = eg.h1();
        let cuts = common::all_cuts_brute(h, eg.a(), eg.y());
        let bn = random_bn(&g, seed + 900, 2, 0.05);
        let pis = policies(&bn, &q, seed);
        for z1 in &cuts {
            for z2 in &cuts {
                if !cut_partial_order(h, eg.a(), eg.y(), z1, z2).unwrap() {
                    continue;
                }
                let d1 = eg.to_dag_ids(z1);
                let d2 = eg.to_dag_ids(z2);
                for pi in &pis {
                    let v1 = influence_variance(&bn, &q, pi, &d1).unwrap().sigma2;
                    let v2 = influence_variance(&bn, &q, pi, &d2).unwrap().sigma2;
                    assert!(v1 <= v2 + 1e-9, "seed {seed}: order broke ({v1} > {v2})");
                }
            }
        }
    }
}

#[test]
fn fully_observed_global_candidate_dominates_everything() {
    // With nothing hidden, the global candidate is guaranteed and must have
    // the smallest variance among all valid sets, on every sampled law.
    for seed in 0..10u64 {
        let (g, q) = random_admissible_instance(seed.wrapping_mul(13).wrapping_add(3), 6, 0);
        let o = adjust_core::cuts::find_opt(&g, &q);
        assert_eq!(o.global_guaranteed, Some(true));
        let o_set = o.set.unwrap();
        let valid = enumerate_adjustment_sets(&g, &q, EnumerationMode::All).unwrap();
        for law in 0..3u64 {
            let bn = random_bn(&g, seed * 71 + law, 2, 0.05);
            for pi in policies(&bn, &q, seed + law) {
                let vo = influence_variance(&bn, &q, &pi, &o_set).unwrap().sigma2;
                for z in &valid {
                    let vz = influence_variance(&bn, &q, &pi, z).unwrap().sigma2;
                    assert!(vo <= vz + 1e-9, "seed {seed}: {vo} > {vz} for {z:?}");
                }
            }
        }
    }
}

/// Search helper: supplementation pairs (base set, extra set) satisfying the
/// separation precondition.
fn supplementation_pairs(
    g: &Dag,
    q: &Query,
    valid: &[VertexSet],
    cap: usize,
) -> Vec<(VertexSet, VertexSet)> {
    let mut out = Vec::new();
    for b in valid {
        let mut pool = q.n().clone();
        pool.remove(q.a());
        pool.remove(q.y());
        let pool = pool.difference(b);
        let candidates: Vec<VertexId> = pool.iter().collect();
        for mask in 1u32..(1 << candidates.len().min(4)) {
            let gset: VertexSet = candidates
                .iter()
                .enumerate()
                .filter(|&(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &v)| v)
                .collect();
            let sep = g
                .d_separated(&VertexSet::singleton(q.a()), &gset.difference(b), b)
                .unwrap();
            if sep {
                out.push((b.clone(), gset));
                if out.len() >= cap {
                    return out;
                }
            }
        }
    }
    out
}

/// Search helper: deletion pairs (kept part, dropped part) from partitions
/// of valid sets satisfying the separation precondition.
fn deletion_pairs(
    g: &Dag,
    q: &Query,
    valid: &[VertexSet],
    cap: usize,
) -> Vec<(VertexSet, VertexSet)> {
    let mut out = Vec::new();
    for w in valid {
        let free = w.difference(q.l());
        let free_ids: Vec<VertexId> = free.iter().collect();
        for mask in 1u32..(1 << free_ids.len().min(4)) {
            let bset: VertexSet = free_ids
                .iter()
                .enumerate()
                .filter(|&(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &v)| v)
                .collect();
            let gset = w.difference(&bset);
            let cond = gset.union(&VertexSet::singleton(q.a()));
            if g.d_separated(&VertexSet::singleton(q.y()), &bset, &cond)
                .unwrap()
            {
                out.push((gset, bset));
                if out.len() >= cap {
                    return out;
                }
            }
        }
    }
    out
}

#[test]
fn variance_identities_hold_on_searched_pairs() {
    let mut checked1 = 0;
    let mut checked2 = 0;
    for seed in 0..25u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let valid = common::valid_sets_brute(&g, &q);
        let bn = random_bn(&g, seed + 40, 2, 0.05);
        let pi = random_policy(&bn, &q, seed + 41);
        for (b, gset) in supplementation_pairs(&g, &q, &valid, 3) {
            let (lhs, rhs) = supplementation_identity(&bn, &q, &pi, &b, &gset).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-9,
                "seed {seed}: supplementation {lhs} vs {rhs}"
            );
            assert!(lhs >= -1e-12 && rhs >= -1e-12, "seed {seed}: negative gain");
            checked1 += 1;
        }
        for (gset, bset) in deletion_pairs(&g, &q, &valid, 3) {
            let (lhs, rhs) = deletion_identity(&bn, &q, &pi, &gset, &bset).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-9,
                "seed {seed}: deletion {lhs} vs {rhs}"
            );
            assert!(lhs >= -1e-12 && rhs >= -1e-12, "seed {seed}: negative gain");
            checked2 += 1;
        }
    }
    assert!(checked1 >= 20, "too few supplementation pairs ({checked1})");
    assert!(checked2 >= 20, "too few deletion pairs ({checked2})");
}

#[test]
fn minimal_enumeration_is_consistent_with_minimal_cut_structure() {
    for seed in 0..10u64 {
        let (g, q) = random_admissible_instance(seed, 6, 2);
        let eg = build_h1(&g, &q);
        let minimal = enumerate_adjustment_sets(&g, &q, EnumerationMode::Minimal).unwrap();
        for z in &minimal {
            let z_h1 = eg
                .to_h1_ids(z)
                .expect("minimal sets live in the efficiency graph");
            assert!(is_minimal_cut(eg.h1(), eg.a(), eg.y(), &z_h1).unwrap());
        }
    }
}
