//! Adjustment-set theory on the DAG: causal nodes, the forbidden set, the
//! proper back-door graph, validity certificates, admissibility, and the
//! canonical adjustment set.

use crate::error::{Error, Result};
use crate::graph::{Dag, VertexId, VertexSet};

/// One adjustment problem: treatment `a`, outcome `y`, policy covariates `l`,
/// and the observable set `n`.
///
/// Constructing a `Query` validates the inclusion assumptions eagerly:
/// (i) `a` is an ancestor of `y`, (ii) `{a, y} ∪ l ⊆ n`, and (iii) `l`
/// contains no descendant of `a`. All failures are reported together.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    a: VertexId,
    y: VertexId,
    l: VertexSet,
    n: VertexSet,
}

impl Query {
    /// `n = None` defaults the observable set to all non-hidden vertices.
    pub fn new(
        g: &Dag,
        a: VertexId,
        y: VertexId,
        l: VertexSet,
        n: Option<VertexSet>,
    ) -> Result<Query> {
        let nv = g.vertex_count();
        for &v in [a, y].iter() {
            if v >= nv {
                return Err(Error::InvalidVertex(v));
            }
        }
        for v in l.iter().chain(n.iter().flat_map(|s| s.iter())) {
            if v >= nv {
                return Err(Error::InvalidVertex(v));
            }
        }
        let n = n.unwrap_or_else(|| g.observable_set());

        let mut problems = Vec::new();
        if a == y {
            problems.push("treatment and outcome coincide".to_string());
        } else if !g.descendants(&VertexSet::singleton(a))?.contains(y) {
            problems.push(format!(
                "{} is not an ancestor of {}",
                g.label(a),
                g.label(y)
            ));
        }
        let core: VertexSet = [a, y].into_iter().chain(l.iter()).collect();
        let missing = core.difference(&n);
        if !missing.is_empty() {
            problems.push(format!(
                "{} must be contained in the observable set",
                g.format_set(&missing)
            ));
        }
        let offenders = l.intersection(&g.descendants(&VertexSet::singleton(a))?);
        if !offenders.is_empty() {
            problems.push(format!(
                "policy covariates {} are descendants of {}",
                g.format_set(&offenders),
                g.label(a)
            ));
        }
        let unobservable: VertexSet = n.iter().filter(|&v| g.is_hidden(v)).collect();
        if !unobservable.is_empty() {
            problems.push(format!(
                "{} are flagged hidden but listed as observable",
                g.format_set(&unobservable)
            ));
        }
        if !problems.is_empty() {
            return Err(Error::InclusionViolation(problems.join("; ")));
        }
        Ok(Query { a, y, l, n })
    }

    pub fn a(&self) -> VertexId {
        self.a
    }

    pub fn y(&self) -> VertexId {
        self.y
    }

    pub fn l(&self) -> &VertexSet {
        &self.l
    }

    pub fn n(&self) -> &VertexSet {
        &self.n
    }
}

/// Why a candidate set failed the validity test, if it did.
///
/// Clauses are checked in the fixed order (3) set bounds, (2) forbidden
/// intersection, (1) separation, and the first failure is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NotBetweenLandN,
    IntersectsForbidden,
    SeparationFails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityCertificate {
    violated: Option<Violation>,
}

impl ValidityCertificate {
    pub fn valid(&self) -> bool {
        self.violated.is_none()
    }

    pub fn violation(&self) -> Option<Violation> {
        self.violated
    }
}

/// Vertices on a causal path from `a` to `y`, excluding `a` itself:
/// `cn = (de(a) ∩ an(y)) \ {a}`.
pub fn causal_nodes(g: &Dag, q: &Query) -> VertexSet {
    let de = g
        .descendants(&VertexSet::singleton(q.a()))
        .expect("query is validated");
    let an = g
        .ancestors(&VertexSet::singleton(q.y()))
        .expect("query is validated");
    let mut cn = de.intersection(&an);
    cn.remove(q.a());
    cn
}

/// `forb = de(cn) ∪ {a}`: nothing in here may enter a valid adjustment set.
pub fn forbidden_set(g: &Dag, q: &Query) -> VertexSet {
    let cn = causal_nodes(g, q);
    let mut forb = g.descendants(&cn).expect("query is validated");
    forb.insert(q.a());
    forb
}

/// Copy of `g` minus the first edge of every causal path from `a` to `y`,
/// i.e. minus `a -> c` for every child `c` of `a` that is an ancestor of `y`.
pub fn proper_backdoor_graph(g: &Dag, q: &Query) -> Dag {
    let an_y = g
        .ancestors(&VertexSet::singleton(q.y()))
        .expect("query is validated");
    let drop: Vec<(VertexId, VertexId)> = g
        .children(q.a())
        .iter()
        .copied()
        .filter(|&c| an_y.contains(c))
        .map(|c| (q.a(), c))
        .collect();
    g.remove_edges(&drop)
}

/// Validity test for a candidate set `z`: (1) `y ⫫ a | z` in the proper
/// back-door graph, (2) `z` avoids the forbidden set, (3) `l ⊆ z ⊆ n`.
pub fn is_adjustment_set(g: &Dag, q: &Query, z: &VertexSet) -> Result<ValidityCertificate> {
    for v in z.iter() {
        if v >= g.vertex_count() {
            return Err(Error::InvalidVertex(v));
        }
    }
    if z.contains(q.a()) || z.contains(q.y()) {
        return Err(Error::Overlap(
            "candidate set must not contain the treatment or outcome".into(),
        ));
    }
    if !q.l().is_subset(z) || !z.is_subset(q.n()) {
        return Ok(ValidityCertificate {
            violated: Some(Violation::NotBetweenLandN),
        });
    }
    if !z.is_disjoint(&forbidden_set(g, q)) {
        return Ok(ValidityCertificate {
            violated: Some(Violation::IntersectsForbidden),
        });
    }
    let pbd = proper_backdoor_graph(g, q);
    let sep = pbd.d_separated(
        &VertexSet::singleton(q.y()),
        &VertexSet::singleton(q.a()),
        z,
    )?;
    if !sep {
        return Ok(ValidityCertificate {
            violated: Some(Violation::SeparationFails),
        });
    }
    Ok(ValidityCertificate { violated: None })
}

/// The candidate set `(an({a,y} ∪ l) ∩ n) \ forb`. It is a valid adjustment
/// set exactly when one exists at all; pair with [`is_adjustment_set`].
pub fn canonical_adjustment(g: &Dag, q: &Query) -> VertexSet {
    let seed: VertexSet = [q.a(), q.y()].into_iter().chain(q.l().iter()).collect();
    let an = g.ancestors(&seed).expect("query is validated");
    an.intersection(q.n()).difference(&forbidden_set(g, q))
}

/// Whether `(l, n)` is an admissible pair: some valid set `z` with
/// `l ⊆ z ⊆ n` exists. Decided by testing the canonical candidate.
pub fn exists_adjustment(g: &Dag, q: &Query) -> bool {
    is_adjustment_set(g, q, &canonical_adjustment(g, q))
        .map(|c| c.valid())
        .unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Certifies that adjusting for the first set is never worse (its
    /// asymptotic variance is no larger under any law or policy).
    GNotWorse,
    Incomparable,
}

/// Graphical variance comparison of two valid sets: `zg` is certified
/// not-worse than `zb` iff `a ⫫ zg\zb | zb` and `y ⫫ zb\zg | zg ∪ {a}`.
pub fn graphical_compare(g: &Dag, q: &Query, zg: &VertexSet, zb: &VertexSet) -> Result<Comparison> {
    for (name, z) in [("first", zg), ("second", zb)] {
        if !is_adjustment_set(g, q, z)?.valid() {
            return Err(Error::InvalidAdjustmentSet(format!(
                "{name} set {} is not a valid adjustment set",
                g.format_set(z)
            )));
        }
    }
    let a = VertexSet::singleton(q.a());
    let y = VertexSet::singleton(q.y());
    let cond_a = g.d_separated(&a, &zg.difference(zb), zb)?;
    if !cond_a {
        return Ok(Comparison::Incomparable);
    }
    let cond_y = g.d_separated(&y, &zb.difference(zg), &zg.union(&a))?;
    if !cond_y {
        return Ok(Comparison::Incomparable);
    }
    Ok(Comparison::GNotWorse)
}
