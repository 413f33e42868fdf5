//! Covariate adjustment sets for causal DAGs with hidden variables.
//!
//! Given a DAG, a treatment `a`, an outcome `y`, policy covariates `l`, and
//! an observable set `n`, this crate validates candidate adjustment sets,
//! computes the globally optimal, optimal minimal, and optimal minimum
//! dynamic adjustment sets through vertex cuts in the adjustment efficiency
//! graph, and provides an exact discrete-model oracle that evaluates policy
//! values and asymptotic estimator variances by full enumeration.

pub mod adjustment;
pub mod cuts;
pub mod efficiency;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod random;

#[doc(hidden)]
pub mod fixtures;

pub use adjustment::{
    canonical_adjustment, causal_nodes, exists_adjustment, forbidden_set, graphical_compare,
    is_adjustment_set, proper_backdoor_graph, Comparison, Query, ValidityCertificate, Violation,
};
pub use cuts::{
    cut_meet, cut_partial_order, disjoint_paths, find_opt, find_opt_minimal, find_opt_minimum,
    is_in_minimum, min_cut_size, CutKind, CutResult, PathBundle,
};
pub use efficiency::{build_h0, build_h1, EfficiencyGraph};
pub use error::{Error, Result};
pub use graph::{Dag, UGraph, VertexId, VertexSet};
pub use oracle::{
    adjustment_value, deletion_identity, enumerate_adjustment_sets, gformula_value,
    influence_variance, joint_distribution, supplementation_identity, DiscreteBn, EnumerationMode,
    Policy, VarianceReport,
};
