//! Exact semantic ground truth on discrete models: policy values via the
//! g-formula and via adjustment, influence-function variances, the two
//! variance-identity checks, and brute-force adjustment-set enumeration.
//!
//! Every expectation here is an exact sum over the full joint support; no
//! Monte Carlo is involved anywhere.

use crate::adjustment::{is_adjustment_set, Query};
use crate::error::{Error, Result};
use crate::graph::{Dag, VertexId, VertexSet};

/// Default cap on the number of joint configurations.
pub const STATE_SPACE_CAP: u64 = 1 << 20;

/// Hard cap on the enumeration universe.
pub const ENUMERATION_CAP: usize = 20;

/// Compensated (Kahan) accumulator, so summation order cannot move results
/// beyond ~1e-15.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Conditional probability table of one vertex: one row per configuration of
/// its parents (ascending parent ids, last parent varying fastest), each row
/// a distribution over the vertex's own states.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(rows: Vec<Vec<f64>>) -> Cpt {
        Cpt { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// A fully specified discrete Bayesian network over a DAG, with a real value
/// attached to every state of every vertex so that any vertex can serve as
/// the outcome.
#[derive(Debug, Clone)]
pub struct DiscreteBn {
    dag: Dag,
    cards: Vec<usize>,
    cpts: Vec<Cpt>,
    state_values: Vec<Vec<f64>>,
}

impl DiscreteBn {
    /// Validates shapes, non-negativity, and that every CPT row sums to one
    /// within 1e-12. `state_values = None` defaults each state to its index.
    pub fn new(
        dag: Dag,
        cards: Vec<usize>,
        cpts: Vec<Cpt>,
        state_values: Option<Vec<Vec<f64>>>,
    ) -> Result<DiscreteBn> {
        let n = dag.vertex_count();
        if cards.len() != n || cpts.len() != n {
            return Err(Error::Model(
                "cardinalities and tables must cover every vertex".into(),
            ));
        }
        for (v, &k) in cards.iter().enumerate() {
            if k < 2 {
                return Err(Error::Model(format!(
                    "vertex {} needs at least two states",
                    dag.label(v)
                )));
            }
        }
        for v in 0..n {
            let expected_rows: usize = dag.parents(v).iter().map(|&p| cards[p]).product();
            if cpts[v].rows.len() != expected_rows {
                return Err(Error::Model(format!(
                    "table for {} has {} rows, expected {}",
                    dag.label(v),
                    cpts[v].rows.len(),
                    expected_rows
                )));
            }
            for row in &cpts[v].rows {
                if row.len() != cards[v] {
                    return Err(Error::Model(format!(
                        "table row for {} has {} entries, expected {}",
                        dag.label(v),
                        row.len(),
                        cards[v]
                    )));
                }
                if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                    return Err(Error::Model(format!(
                        "table for {} contains a negative or non-finite entry",
                        dag.label(v)
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::Model(format!(
                        "table row for {} sums to {sum}, not 1",
                        dag.label(v)
                    )));
                }
            }
        }
        let state_values = match state_values {
            Some(vals) => {
                if vals.len() != n || vals.iter().zip(&cards).any(|(v, &k)| v.len() != k) {
                    return Err(Error::Model("state values must cover every state".into()));
                }
                vals
            }
            None => cards
                .iter()
                .map(|&k| (0..k).map(|s| s as f64).collect())
                .collect(),
        };
        Ok(DiscreteBn {
            dag,
            cards,
            cpts,
            state_values,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cardinality(&self, v: VertexId) -> usize {
        self.cards[v]
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn cpt(&self, v: VertexId) -> &Cpt {
        &self.cpts[v]
    }

    pub fn state_values(&self, v: VertexId) -> &[f64] {
        &self.state_values[v]
    }

    /// Replaces the attached values of one vertex.
    pub fn set_state_values(&mut self, v: VertexId, values: Vec<f64>) -> Result<()> {
        if v >= self.cards.len() {
            return Err(Error::InvalidVertex(v));
        }
        if values.len() != self.cards[v] {
            return Err(Error::Model("state values must cover every state".into()));
        }
        self.state_values[v] = values;
        Ok(())
    }

    fn row_index(&self, v: VertexId, states: &[usize]) -> usize {
        let mut idx = 0;
        for &p in self.dag.parents(v) {
            idx = idx * self.cards[p] + states[p];
        }
        idx
    }

    /// Probability of one full configuration.
    pub fn prob(&self, states: &[usize]) -> f64 {
        let mut p = 1.0;
        for v in 0..self.cards.len() {
            p *= self.cpts[v].rows[self.row_index(v, states)][states[v]];
        }
        p
    }

    fn state_space(&self) -> u128 {
        self.cards.iter().map(|&k| k as u128).product()
    }
}

/// The exact joint distribution as a dense table.
#[derive(Debug, Clone)]
pub struct JointTable {
    cards: Vec<usize>,
    p: Vec<f64>,
}

impl JointTable {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.p[idx]
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// State of vertex `v` in configuration `idx` (last vertex varies
    /// fastest).
    pub fn state(&self, idx: usize, v: VertexId) -> usize {
        let mut rest = idx;
        for u in (v + 1..self.cards.len()).rev() {
            rest /= self.cards[u];
        }
        rest % self.cards[v]
    }

    pub fn total(&self) -> f64 {
        let mut k = Kahan::default();
        for &p in &self.p {
            k.add(p);
        }
        k.value()
    }
}

/// Walks all configurations in joint-index order, exposing the state vector.
struct Odometer {
    cards: Vec<usize>,
    states: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(cards: &[usize]) -> Odometer {
        Odometer {
            cards: cards.to_vec(),
            states: vec![0; cards.len()],
            done: cards.is_empty(),
        }
    }

    fn states(&self) -> &[usize] {
        &self.states
    }

    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        for v in (0..self.cards.len()).rev() {
            self.states[v] += 1;
            if self.states[v] < self.cards[v] {
                return true;
            }
            self.states[v] = 0;
        }
        self.done = true;
        false
    }
}

/// Mixed-radix index over a subset of vertices, in ascending id order with
/// the last vertex varying fastest; matches CPT row order.
struct SubIndexer {
    vars: Vec<VertexId>,
    size: usize,
    cards: Vec<usize>,
}

impl SubIndexer {
    fn new(all_cards: &[usize], vars: &VertexSet) -> SubIndexer {
        let vars: Vec<VertexId> = vars.iter().collect();
        let cards: Vec<usize> = vars.iter().map(|&v| all_cards[v]).collect();
        let size = cards.iter().product::<usize>().max(1);
        SubIndexer { vars, size, cards }
    }

    fn size(&self) -> usize {
        self.size
    }

    fn index(&self, states: &[usize]) -> usize {
        let mut idx = 0;
        for (i, &v) in self.vars.iter().enumerate() {
            idx = idx * self.cards[i] + states[v];
        }
        idx
    }
}

fn check_set_ids(bn: &DiscreteBn, s: &VertexSet) -> Result<()> {
    for v in s.iter() {
        if v >= bn.cards.len() {
            return Err(Error::InvalidVertex(v));
        }
    }
    Ok(())
}

/// Exact joint by multiplying CPT entries over every configuration, with
/// the default configuration cap.
pub fn joint_distribution(bn: &DiscreteBn) -> Result<JointTable> {
    joint_distribution_capped(bn, STATE_SPACE_CAP)
}

/// [`joint_distribution`] with an explicit configuration cap.
pub fn joint_distribution_capped(bn: &DiscreteBn, cap: u64) -> Result<JointTable> {
    let space = bn.state_space();
    if space > cap as u128 {
        return Err(Error::StateSpaceTooLarge(space, cap));
    }
    let size = space as usize;
    let mut p = Vec::with_capacity(size);
    let mut odo = Odometer::new(&bn.cards);
    loop {
        p.push(bn.prob(odo.states()));
        if !odo.advance() {
            break;
        }
    }
    debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    Ok(JointTable {
        cards: bn.cards.clone(),
        p,
    })
}

/// A policy: a conditional law for the treatment given the policy
/// covariates, one row per covariate configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    l: VertexSet,
    l_cards: Vec<usize>,
    a_card: usize,
    rows: Vec<Vec<f64>>,
}

impl Policy {
    pub fn new(
        l: VertexSet,
        l_cards: Vec<usize>,
        a_card: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Policy> {
        let expected: usize = l_cards.iter().product::<usize>().max(1);
        if rows.len() != expected {
            return Err(Error::Model(format!(
                "policy has {} rows, expected {expected}",
                rows.len()
            )));
        }
        for row in &rows {
            if row.len() != a_card {
                return Err(Error::Model(
                    "policy row length must match treatment states".into(),
                ));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::Model(
                    "policy contains a negative or non-finite entry".into(),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Model(format!("policy row sums to {sum}, not 1")));
            }
        }
        Ok(Policy {
            l,
            l_cards,
            a_card,
            rows,
        })
    }

    /// The non-random policy that always assigns `a_state`.
    pub fn point_mass(bn: &DiscreteBn, q: &Query, a_state: usize) -> Policy {
        let l = q.l().clone();
        let l_cards: Vec<usize> = l.iter().map(|v| bn.cards[v]).collect();
        let a_card = bn.cards[q.a()];
        assert!(a_state < a_card, "treatment state out of range");
        let size: usize = l_cards.iter().product::<usize>().max(1);
        let mut row = vec![0.0; a_card];
        row[a_state] = 1.0;
        Policy {
            l,
            l_cards,
            a_card,
            rows: vec![row; size],
        }
    }

    /// Uniform draw over treatment states, regardless of covariates.
    pub fn uniform(bn: &DiscreteBn, q: &Query) -> Policy {
        let l = q.l().clone();
        let l_cards: Vec<usize> = l.iter().map(|v| bn.cards[v]).collect();
        let a_card = bn.cards[q.a()];
        let size: usize = l_cards.iter().product::<usize>().max(1);
        let row = vec![1.0 / a_card as f64; a_card];
        Policy {
            l,
            l_cards,
            a_card,
            rows: vec![row; size],
        }
    }

    /// The observational treatment law, available when the treatment's
    /// parents are all policy covariates.
    pub fn observational(bn: &DiscreteBn, q: &Query) -> Result<Policy> {
        let pa: VertexSet = bn.dag.parents(q.a()).iter().copied().collect();
        if !pa.is_subset(q.l()) {
            return Err(Error::Precondition(
                "observational policy needs every treatment parent among the policy covariates"
                    .into(),
            ));
        }
        let l = q.l().clone();
        let l_cards: Vec<usize> = l.iter().map(|v| bn.cards[v]).collect();
        let a_card = bn.cards[q.a()];
        let l_ids: Vec<VertexId> = l.iter().collect();
        let size: usize = l_cards.iter().product::<usize>().max(1);
        let mut rows = Vec::with_capacity(size);
        let mut odo = Odometer::new(&l_cards);
        let mut full = vec![0usize; bn.cards.len()];
        loop {
            for (i, &v) in l_ids.iter().enumerate() {
                full[v] = odo.states()[i];
            }
            let row_idx = bn.row_index(q.a(), &full);
            rows.push(bn.cpts[q.a()].rows[row_idx].clone());
            if !odo.advance() {
                break;
            }
        }
        Ok(Policy {
            l,
            l_cards,
            a_card,
            rows,
        })
    }

    pub fn prob(&self, a_state: usize, l_index: usize) -> f64 {
        self.rows[l_index][a_state]
    }

    pub fn l(&self) -> &VertexSet {
        &self.l
    }

    pub fn a_card(&self) -> usize {
        self.a_card
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

fn validate_policy(bn: &DiscreteBn, q: &Query, pi: &Policy) -> Result<()> {
    let l_cards: Vec<usize> = q.l().iter().map(|v| bn.cards[v]).collect();
    if pi.l != *q.l() || pi.l_cards != l_cards || pi.a_card != bn.cards[q.a()] {
        return Err(Error::Precondition(
            "policy does not match the query and model".into(),
        ));
    }
    Ok(())
}

/// The policy value by the g-formula: the mean of the outcome value when the
/// treatment's factor is replaced by the policy.
pub fn gformula_value(bn: &DiscreteBn, q: &Query, pi: &Policy) -> Result<f64> {
    validate_policy(bn, q, pi)?;
    let space = bn.state_space();
    if space > STATE_SPACE_CAP as u128 {
        return Err(Error::StateSpaceTooLarge(space, STATE_SPACE_CAP));
    }
    let l_indexer = SubIndexer::new(&bn.cards, q.l());
    let n = bn.cards.len();
    let mut total = Kahan::default();
    let mut odo = Odometer::new(&bn.cards);
    loop {
        let states = odo.states();
        let mut w = pi.prob(states[q.a()], l_indexer.index(states));
        if w > 0.0 {
            for v in 0..n {
                if v != q.a() {
                    w *= bn.cpts[v].rows[bn.row_index(v, states)][states[v]];
                }
            }
            total.add(w * bn.state_values[q.y()][states[q.y()]]);
        }
        if !odo.advance() {
            break;
        }
    }
    Ok(total.value())
}

/// Per-set conditional tables pulled out of the joint in one pass.
struct AdjustmentTables {
    z_indexer: SubIndexer,
    a_card: usize,
    pz: Vec<f64>,
    paz: Vec<f64>,
    b: Vec<f64>,
    l_index_of_z: Vec<usize>,
}

impl AdjustmentTables {
    /// `z` must contain every policy covariate so that the policy row is a
    /// function of the `z` configuration.
    fn build(
        bn: &DiscreteBn,
        q: &Query,
        pi: &Policy,
        joint: &JointTable,
        z: &VertexSet,
    ) -> Result<AdjustmentTables> {
        debug_assert!(
            q.l().is_subset(z),
            "policy covariates must be part of the set"
        );
        let z_indexer = SubIndexer::new(&bn.cards, z);
        let l_indexer = SubIndexer::new(&bn.cards, q.l());
        let a_card = bn.cards[q.a()];
        let size = z_indexer.size();
        let mut pz = vec![0.0; size];
        let mut paz = vec![0.0; size * a_card];
        let mut y_sum = vec![0.0; size * a_card];
        let mut l_index_of_z = vec![0usize; size];
        let mut odo = Odometer::new(&bn.cards);
        let mut idx = 0;
        loop {
            let p = joint.prob(idx);
            let states = odo.states();
            let zi = z_indexer.index(states);
            l_index_of_z[zi] = l_indexer.index(states);
            if p > 0.0 {
                let a = states[q.a()];
                pz[zi] += p;
                paz[zi * a_card + a] += p;
                y_sum[zi * a_card + a] += p * bn.state_values[q.y()][states[q.y()]];
            }
            idx += 1;
            if !odo.advance() {
                break;
            }
        }
        let mut b = vec![0.0; size * a_card];
        for zi in 0..size {
            if pz[zi] <= 0.0 {
                continue;
            }
            for a in 0..a_card {
                let cell = zi * a_card + a;
                if paz[cell] > 0.0 {
                    b[cell] = y_sum[cell] / paz[cell];
                } else if pi.prob(a, l_index_of_z[zi]) > 0.0 {
                    return Err(Error::PositivityViolation(format!(
                        "treatment state {a} has zero probability on a covariate configuration \
                         with positive mass (set {})",
                        bn.dag.format_set(z)
                    )));
                }
            }
        }
        Ok(AdjustmentTables {
            z_indexer,
            a_card,
            pz,
            paz,
            b,
            l_index_of_z,
        })
    }

    fn f_a_given_z(&self, a: usize, zi: usize) -> f64 {
        self.paz[zi * self.a_card + a] / self.pz[zi]
    }

    fn b_of(&self, a: usize, zi: usize) -> f64 {
        self.b[zi * self.a_card + a]
    }

    /// `Σ_a π(a | l(z)) b(a, z)` for one `z` configuration.
    fn policy_mean_b(&self, pi: &Policy, zi: usize) -> f64 {
        let li = self.l_index_of_z[zi];
        (0..self.a_card)
            .map(|a| pi.prob(a, li) * self.b_of(a, zi))
            .sum()
    }
}

fn check_candidate(q: &Query, z: &VertexSet) -> Result<()> {
    if z.contains(q.a()) || z.contains(q.y()) {
        return Err(Error::Overlap(
            "candidate set must not contain the treatment or outcome".into(),
        ));
    }
    if !q.l().is_subset(z) {
        return Err(Error::Precondition(
            "candidate set must contain every policy covariate".into(),
        ));
    }
    Ok(())
}

/// The adjustment functional: `E[ E_π*{ E(Y | A, Z) | Z } ]`, computed
/// exactly. Coincides with the g-formula value exactly when `z` is a valid
/// adjustment set.
pub fn adjustment_value(bn: &DiscreteBn, q: &Query, pi: &Policy, z: &VertexSet) -> Result<f64> {
    validate_policy(bn, q, pi)?;
    check_set_ids(bn, z)?;
    check_candidate(q, z)?;
    let joint = joint_distribution(bn)?;
    let tables = AdjustmentTables::build(bn, q, pi, &joint, z)?;
    let mut total = Kahan::default();
    for zi in 0..tables.z_indexer.size() {
        if tables.pz[zi] > 0.0 {
            total.add(tables.pz[zi] * tables.policy_mean_b(pi, zi));
        }
    }
    Ok(total.value())
}

/// One arm of the per-treatment-state decomposition of the influence
/// function.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmVariance {
    pub a_state: usize,
    pub variance: f64,
}

/// Exact policy value and influence-function variance for one set.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub chi: f64,
    pub sigma2: f64,
    /// `E[ψ]`; zero (within tolerance) for valid adjustment sets.
    pub mean_psi: f64,
    pub components: Vec<ArmVariance>,
}

/// Variance of the influence function for an arbitrary candidate set
/// containing the policy covariates; no validity check. Used internally and
/// by the identity checks.
fn psi_moments(
    bn: &DiscreteBn,
    q: &Query,
    pi: &Policy,
    joint: &JointTable,
    z: &VertexSet,
    chi: f64,
) -> Result<VarianceReport> {
    let tables = AdjustmentTables::build(bn, q, pi, joint, z)?;
    let a_card = tables.a_card;
    let l_indexer = SubIndexer::new(&bn.cards, q.l());

    // Constant term of each arm: E[π(a | L) b(a, Z)].
    let mut c_a = vec![Kahan::default(); a_card];
    for zi in 0..tables.z_indexer.size() {
        if tables.pz[zi] > 0.0 {
            let li = tables.l_index_of_z[zi];
            for (a, acc) in c_a.iter_mut().enumerate() {
                acc.add(tables.pz[zi] * pi.prob(a, li) * tables.b_of(a, zi));
            }
        }
    }
    let c_a: Vec<f64> = c_a.into_iter().map(Kahan::value).collect();

    let mut mean = Kahan::default();
    let mut second = Kahan::default();
    let mut arm_mean = vec![Kahan::default(); a_card];
    let mut arm_second = vec![Kahan::default(); a_card];
    let mut odo = Odometer::new(&bn.cards);
    let mut idx = 0;
    loop {
        let p = joint.prob(idx);
        if p > 0.0 {
            let states = odo.states();
            let zi = tables.z_indexer.index(states);
            let li = l_indexer.index(states);
            let a_obs = states[q.a()];
            let y_val = bn.state_values[q.y()][states[q.y()]];
            let f_obs = tables.f_a_given_z(a_obs, zi);
            let resid = y_val - tables.b_of(a_obs, zi);
            let psi = pi.prob(a_obs, li) / f_obs * resid + tables.policy_mean_b(pi, zi) - chi;
            mean.add(p * psi);
            second.add(p * psi * psi);
            for a in 0..a_card {
                let pia = pi.prob(a, li);
                let indicator = if a == a_obs { pia / f_obs * resid } else { 0.0 };
                let psi_a = indicator + pia * tables.b_of(a, zi) - c_a[a];
                arm_mean[a].add(p * psi_a);
                arm_second[a].add(p * psi_a * psi_a);
            }
        }
        idx += 1;
        if !odo.advance() {
            break;
        }
    }
    let mean = mean.value();
    let sigma2 = second.value() - mean * mean;
    let components = (0..a_card)
        .map(|a| {
            let m = arm_mean[a].value();
            ArmVariance {
                a_state: a,
                variance: arm_second[a].value() - m * m,
            }
        })
        .collect();
    Ok(VarianceReport {
        chi,
        sigma2,
        mean_psi: mean,
        components,
    })
}

/// Exact influence-function variance for a valid adjustment set.
pub fn influence_variance(
    bn: &DiscreteBn,
    q: &Query,
    pi: &Policy,
    z: &VertexSet,
) -> Result<VarianceReport> {
    validate_policy(bn, q, pi)?;
    check_set_ids(bn, z)?;
    let cert = is_adjustment_set(bn.dag(), q, z)?;
    if !cert.valid() {
        return Err(Error::InvalidAdjustmentSet(format!(
            "{} fails the validity test ({:?})",
            bn.dag().format_set(z),
            cert.violation()
                .expect("invalid certificate names a clause")
        )));
    }
    let chi = gformula_value(bn, q, pi)?;
    let joint = joint_distribution(bn)?;
    psi_moments(bn, q, pi, &joint, z, chi)
}

/// Both sides of the precision-variable supplementation identity:
/// `σ²_B − σ²_{G∪B}` against the explicit covariance form `1ᵀ var(S) 1`.
///
/// Requires `b_set` to be a valid adjustment set and `a ⫫ g_set | b_set`.
pub fn supplementation_identity(
    bn: &DiscreteBn,
    q: &Query,
    pi: &Policy,
    b_set: &VertexSet,
    g_set: &VertexSet,
) -> Result<(f64, f64)> {
    validate_policy(bn, q, pi)?;
    check_set_ids(bn, b_set)?;
    check_set_ids(bn, g_set)?;
    if g_set.contains(q.a()) || g_set.contains(q.y()) {
        return Err(Error::Precondition(
            "supplement must avoid the treatment and outcome".into(),
        ));
    }
    if !is_adjustment_set(bn.dag(), q, b_set)?.valid() {
        return Err(Error::Precondition(
            "base set must be a valid adjustment set".into(),
        ));
    }
    if !bn.dag().d_separated(
        &VertexSet::singleton(q.a()),
        &g_set.difference(b_set),
        b_set,
    )? {
        return Err(Error::Precondition(
            "treatment must be separated from the supplement given the base set".into(),
        ));
    }
    let gb = g_set.union(b_set);
    let chi = gformula_value(bn, q, pi)?;
    let joint = joint_distribution(bn)?;
    let sigma_b = psi_moments(bn, q, pi, &joint, b_set, chi)?.sigma2;
    let sigma_gb = psi_moments(bn, q, pi, &joint, &gb, chi)?.sigma2;
    let lhs = sigma_b - sigma_gb;

    let t_gb = AdjustmentTables::build(bn, q, pi, &joint, &gb)?;
    let t_b = AdjustmentTables::build(bn, q, pi, &joint, b_set)?;
    let a_card = t_gb.a_card;
    let l_indexer = SubIndexer::new(&bn.cards, q.l());
    let mut s_mean = vec![Kahan::default(); a_card];
    let mut s_cross = vec![Kahan::default(); a_card * a_card];
    let mut odo = Odometer::new(&bn.cards);
    let mut idx = 0;
    let mut s = vec![0.0; a_card];
    loop {
        let p = joint.prob(idx);
        if p > 0.0 {
            let states = odo.states();
            let gbi = t_gb.z_indexer.index(states);
            let bi = t_b.z_indexer.index(states);
            let li = l_indexer.index(states);
            let a_obs = states[q.a()];
            for (a, slot) in s.iter_mut().enumerate() {
                let pia = pi.prob(a, li);
                if pia == 0.0 {
                    *slot = 0.0;
                    continue;
                }
                let factor = if a == a_obs {
                    1.0 / t_gb.f_a_given_z(a, gbi) - 1.0
                } else {
                    -1.0
                };
                *slot = factor * pia * (t_gb.b_of(a, gbi) - t_b.b_of(a, bi));
            }
            for a in 0..a_card {
                s_mean[a].add(p * s[a]);
                for a2 in 0..a_card {
                    s_cross[a * a_card + a2].add(p * s[a] * s[a2]);
                }
            }
        }
        idx += 1;
        if !odo.advance() {
            break;
        }
    }
    let means: Vec<f64> = s_mean.into_iter().map(Kahan::value).collect();
    let mut rhs = 0.0;
    for a in 0..a_card {
        for a2 in 0..a_card {
            rhs += s_cross[a * a_card + a2].value() - means[a] * means[a2];
        }
    }
    Ok((lhs, rhs))
}

/// Both sides of the overadjustment-deletion identity:
/// `σ²_{G∪B} − σ²_G` against the explicit conditional-variance form.
///
/// Requires `g_set ∪ b_set` to be a valid adjustment set, the two parts
/// disjoint, the policy covariates inside `g_set`, and
/// `y ⫫ b_set | g_set ∪ {a}`.
pub fn deletion_identity(
    bn: &DiscreteBn,
    q: &Query,
    pi: &Policy,
    g_set: &VertexSet,
    b_set: &VertexSet,
) -> Result<(f64, f64)> {
    validate_policy(bn, q, pi)?;
    check_set_ids(bn, g_set)?;
    check_set_ids(bn, b_set)?;
    if !g_set.is_disjoint(b_set) {
        return Err(Error::Precondition("the two parts must be disjoint".into()));
    }
    if !q.l().is_subset(g_set) {
        return Err(Error::Precondition(
            "policy covariates must sit in the kept part".into(),
        ));
    }
    let gb = g_set.union(b_set);
    if !is_adjustment_set(bn.dag(), q, &gb)?.valid() {
        return Err(Error::Precondition(
            "the union must be a valid adjustment set".into(),
        ));
    }
    if !bn.dag().d_separated(
        &VertexSet::singleton(q.y()),
        b_set,
        &g_set.union(&VertexSet::singleton(q.a())),
    )? {
        return Err(Error::Precondition(
            "outcome must be separated from the dropped part given the rest and the treatment"
                .into(),
        ));
    }
    let chi = gformula_value(bn, q, pi)?;
    let joint = joint_distribution(bn)?;
    let sigma_gb = psi_moments(bn, q, pi, &joint, &gb, chi)?.sigma2;
    let sigma_g = psi_moments(bn, q, pi, &joint, g_set, chi)?.sigma2;
    let lhs = sigma_gb - sigma_g;

    let a_card = bn.cards[q.a()];
    let g_indexer = SubIndexer::new(&bn.cards, g_set);
    let b_indexer = SubIndexer::new(&bn.cards, b_set);
    let l_indexer = SubIndexer::new(&bn.cards, q.l());
    let size_g = g_indexer.size();
    let size_b = b_indexer.size();
    let mut pag = vec![0.0; a_card * size_g];
    let mut y_sum = vec![0.0; a_card * size_g];
    let mut y2_sum = vec![0.0; a_card * size_g];
    let mut pgb = vec![0.0; size_g * size_b];
    let mut pagb = vec![0.0; a_card * size_g * size_b];
    let mut l_of_g = vec![0usize; size_g];
    let mut odo = Odometer::new(&bn.cards);
    let mut idx = 0;
    loop {
        let p = joint.prob(idx);
        let states = odo.states();
        let gi = g_indexer.index(states);
        l_of_g[gi] = l_indexer.index(states);
        if p > 0.0 {
            let bi = b_indexer.index(states);
            let a_obs = states[q.a()];
            let y_val = bn.state_values[q.y()][states[q.y()]];
            pag[a_obs * size_g + gi] += p;
            y_sum[a_obs * size_g + gi] += p * y_val;
            y2_sum[a_obs * size_g + gi] += p * y_val * y_val;
            pgb[gi * size_b + bi] += p;
            pagb[(a_obs * size_g + gi) * size_b + bi] += p;
        }
        idx += 1;
        if !odo.advance() {
            break;
        }
    }
    let mut rhs = Kahan::default();
    for a in 0..a_card {
        for gi in 0..size_g {
            let mass = pag[a * size_g + gi];
            if mass <= 0.0 {
                continue;
            }
            let ym = y_sum[a * size_g + gi] / mass;
            let var_y = (y2_sum[a * size_g + gi] / mass - ym * ym).max(0.0);
            // Moments of 1 / f(a | G, B) under the law of B given A = a, G.
            let mut w_mean = 0.0;
            let mut w_second = 0.0;
            for bi in 0..size_b {
                let p_joint = pagb[(a * size_g + gi) * size_b + bi];
                if p_joint > 0.0 {
                    let w = pgb[gi * size_b + bi] / p_joint;
                    let cond = p_joint / mass;
                    w_mean += cond * w;
                    w_second += cond * w * w;
                }
            }
            let var_w = (w_second - w_mean * w_mean).max(0.0);
            let pia = pi.prob(a, l_of_g[gi]);
            rhs.add(mass * pia * pia * var_y * var_w);
        }
    }
    Ok((lhs, rhs.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    All,
    Minimal,
    Minimum,
}

/// Brute-force enumeration of valid adjustment sets: every subset of the
/// observables (minus the endpoints) containing the policy covariates is
/// tested against the validity criterion. Output sorted by size, then ids.
pub fn enumerate_adjustment_sets(
    g: &Dag,
    q: &Query,
    mode: EnumerationMode,
) -> Result<Vec<VertexSet>> {
    let mut universe = q.n().clone();
    universe.remove(q.a());
    universe.remove(q.y());
    if universe.len() > ENUMERATION_CAP {
        return Err(Error::TooLarge(universe.len(), ENUMERATION_CAP));
    }
    let free: Vec<VertexId> = universe.difference(q.l()).iter().collect();
    let mut valid: Vec<(u32, VertexSet)> = Vec::new();
    for mask in 0u32..(1u32 << free.len()) {
        let mut z = q.l().clone();
        for (bit, &v) in free.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                z.insert(v);
            }
        }
        if is_adjustment_set(g, q, &z)?.valid() {
            valid.push((mask, z));
        }
    }
    let mut result: Vec<VertexSet> = match mode {
        EnumerationMode::All => valid.into_iter().map(|(_, z)| z).collect(),
        EnumerationMode::Minimal => {
            let masks: Vec<u32> = valid.iter().map(|&(m, _)| m).collect();
            valid
                .into_iter()
                .filter(|&(m, _)| !masks.iter().any(|&other| other != m && other & m == other))
                .map(|(_, z)| z)
                .collect()
        }
        EnumerationMode::Minimum => {
            let best = valid.iter().map(|(_, z)| z.len()).min();
            match best {
                Some(k) => valid
                    .into_iter()
                    .filter(|(_, z)| z.len() == k)
                    .map(|(_, z)| z)
                    .collect(),
                None => Vec::new(),
            }
        }
    };
    result.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    Ok(result)
}
