//! Directed and undirected graph types with the traversals, moralization,
//! and separation primitives everything else builds on.
//!
//! All values are immutable after construction; every operation is a pure
//! function, so graphs can be shared freely across threads.

use crate::error::{Error, Result};
use std::collections::{BTreeSet, VecDeque};

pub type VertexId = usize;

/// A sorted, deduplicated set of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    ids: Vec<VertexId>,
}

impl VertexSet {
    pub fn new() -> Self {
        VertexSet { ids: Vec::new() }
    }

    pub fn singleton(v: VertexId) -> Self {
        VertexSet { ids: vec![v] }
    }

    pub fn from_vec(mut ids: Vec<VertexId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet { ids }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn insert(&mut self, v: VertexId) {
        if let Err(pos) = self.ids.binary_search(&v) {
            self.ids.insert(pos, v);
        }
    }

    pub fn remove(&mut self, v: VertexId) {
        if let Ok(pos) = self.ids.binary_search(&v) {
            self.ids.remove(pos);
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        VertexSet::from_vec(ids)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            ids: self
                .ids
                .iter()
                .copied()
                .filter(|&v| !other.contains(v))
                .collect(),
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            ids: self
                .ids
                .iter()
                .copied()
                .filter(|&v| other.contains(v))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.ids.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.ids.iter().all(|&v| !other.contains(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.ids.iter().copied()
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.ids
    }
}

impl FromIterator<VertexId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        VertexSet::from_vec(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[VertexId; N]> for VertexSet {
    fn from(ids: [VertexId; N]) -> Self {
        VertexSet::from_vec(ids.to_vec())
    }
}

fn check_ids(n: usize, s: &VertexSet) -> Result<()> {
    for v in s.iter() {
        if v >= n {
            return Err(Error::InvalidVertex(v));
        }
    }
    Ok(())
}

/// A directed acyclic graph with string labels and hidden/observable flags.
///
/// Vertex ids are dense integers `0..n`, assigned in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dag {
    labels: Vec<String>,
    parents: Vec<Vec<VertexId>>,
    children: Vec<Vec<VertexId>>,
    hidden: Vec<bool>,
}

impl Dag {
    /// Builds a DAG. Duplicate edges collapse silently; self-loops and
    /// directed cycles are construction errors, as are duplicate labels.
    pub fn new(
        labels: Vec<String>,
        edges: &[(VertexId, VertexId)],
        hidden: &VertexSet,
    ) -> Result<Self> {
        let n = labels.len();
        {
            let mut seen = BTreeSet::new();
            for l in &labels {
                if !seen.insert(l.clone()) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
            }
        }
        check_ids(n, hidden)?;
        let mut edge_set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::InvalidVertex(u));
            }
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u].clone()));
            }
            edge_set.insert((u, v));
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(u, v) in &edge_set {
            children[u].push(v);
            parents[v].push(u);
        }
        for l in parents.iter_mut().chain(children.iter_mut()) {
            l.sort_unstable();
        }

        // Kahn's algorithm; anything left over sits on a cycle.
        let mut indeg: Vec<usize> = parents.iter().map(|p| p.len()).collect();
        let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut emitted = 0;
        while let Some(v) = queue.pop_front() {
            emitted += 1;
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if emitted != n {
            return Err(Error::Cycle);
        }

        let mut hid = vec![false; n];
        for v in hidden.iter() {
            hid[v] = true;
        }
        Ok(Dag {
            labels,
            parents,
            children,
            hidden: hid,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn parents(&self, v: VertexId) -> &[VertexId] {
        &self.parents[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn is_hidden(&self, v: VertexId) -> bool {
        self.hidden[v]
    }

    pub fn hidden_set(&self) -> VertexSet {
        (0..self.vertex_count())
            .filter(|&v| self.hidden[v])
            .collect()
    }

    /// All non-hidden vertices.
    pub fn observable_set(&self) -> VertexSet {
        (0..self.vertex_count())
            .filter(|&v| !self.hidden[v])
            .collect()
    }

    pub fn all_vertices(&self) -> VertexSet {
        (0..self.vertex_count()).collect()
    }

    /// Edges as sorted `(parent, child)` pairs.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in 0..self.vertex_count() {
            for &v in &self.children[u] {
                out.push((u, v));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(|c| c.len()).sum()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    /// Ancestors of `s` including `s` itself (reflexive convention).
    pub fn ancestors(&self, s: &VertexSet) -> Result<VertexSet> {
        self.reach(s, |v| &self.parents[v])
    }

    /// Descendants of `s` including `s` itself.
    pub fn descendants(&self, s: &VertexSet) -> Result<VertexSet> {
        self.reach(s, |v| &self.children[v])
    }

    fn reach<'a, F>(&'a self, s: &VertexSet, next: F) -> Result<VertexSet>
    where
        F: Fn(VertexId) -> &'a [VertexId],
    {
        let n = self.vertex_count();
        check_ids(n, s)?;
        let mut seen = vec![false; n];
        let mut stack: Vec<VertexId> = s.iter().collect();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in next(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        Ok((0..n).filter(|&v| seen[v]).collect())
    }

    /// Subgraph on `keep`, relabeled densely in ascending id order.
    /// Labels and hidden flags carry over.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Result<Dag> {
        check_ids(self.vertex_count(), keep)?;
        let old_ids: Vec<VertexId> = keep.iter().collect();
        let labels: Vec<String> = old_ids.iter().map(|&v| self.labels[v].clone()).collect();
        let hidden: VertexSet = old_ids
            .iter()
            .enumerate()
            .filter(|&(_, &v)| self.hidden[v])
            .map(|(i, _)| i)
            .collect();
        let mut edges = Vec::new();
        for (new_u, &u) in old_ids.iter().enumerate() {
            for &v in &self.children[u] {
                if let Ok(new_v) = old_ids.binary_search(&v) {
                    edges.push((new_u, new_v));
                }
            }
        }
        Dag::new(labels, &edges, &hidden)
    }

    /// Copy of the graph with the given directed edges removed.
    pub fn remove_edges(&self, drop: &[(VertexId, VertexId)]) -> Dag {
        let drop_set: BTreeSet<(VertexId, VertexId)> = drop.iter().copied().collect();
        let edges: Vec<(VertexId, VertexId)> = self
            .edges()
            .into_iter()
            .filter(|e| !drop_set.contains(e))
            .collect();
        Dag::new(self.labels.clone(), &edges, &self.hidden_set())
            .expect("removing edges preserves acyclicity")
    }

    /// Moral graph: `u - v` iff `u -> v`, `v -> u`, or `u` and `v` share a child.
    pub fn moralize(&self) -> UGraph {
        let n = self.vertex_count();
        let mut edges = Vec::new();
        for v in 0..n {
            let pa = &self.parents[v];
            for &p in pa {
                edges.push((p, v));
            }
            for i in 0..pa.len() {
                for j in i + 1..pa.len() {
                    edges.push((pa[i], pa[j]));
                }
            }
        }
        UGraph::new(self.labels.clone(), &edges).expect("moral edges are valid")
    }

    /// d-separation of `u` and `w` given `z`: moralize the ancestral graph of
    /// `u ∪ w ∪ z` and test plain separation there.
    pub fn d_separated(&self, u: &VertexSet, w: &VertexSet, z: &VertexSet) -> Result<bool> {
        let n = self.vertex_count();
        check_ids(n, u)?;
        check_ids(n, w)?;
        check_ids(n, z)?;
        if !u.is_disjoint(w) || !u.is_disjoint(z) || !w.is_disjoint(z) {
            return Err(Error::Overlap("u, w, z must be pairwise disjoint".into()));
        }
        if u.is_empty() || w.is_empty() {
            return Ok(true);
        }
        let an = self.ancestors(&u.union(w).union(z))?;
        let sub = self.induced_subgraph(&an)?;
        let h = sub.moralize();
        let old_ids: Vec<VertexId> = an.iter().collect();
        let translate = |s: &VertexSet| -> VertexSet {
            s.iter()
                .map(|v| old_ids.binary_search(&v).expect("vertex is ancestral"))
                .collect()
        };
        h.separated(&translate(u), &translate(w), &translate(z))
    }

    /// `{label, ...}` rendering of a set, in id order.
    pub fn format_set(&self, s: &VertexSet) -> String {
        let names: Vec<&str> = s.iter().map(|v| self.label(v)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// An undirected graph with string labels.
#[derive(Debug, Clone, PartialEq)]
pub struct UGraph {
    labels: Vec<String>,
    adj: Vec<Vec<VertexId>>,
}

impl UGraph {
    /// Builds an undirected graph. Duplicate edges collapse; self-loops error.
    pub fn new(labels: Vec<String>, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let n = labels.len();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::InvalidVertex(u));
            }
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
            if u == v {
                return Err(Error::SelfLoop(labels[u].clone()));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            adj[u].push(v);
            adj[v].push(u);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Ok(UGraph { labels, adj })
    }

    /// Trusted constructor from a finished adjacency structure. Callers must
    /// supply sorted, deduplicated, symmetric lists without self-loops.
    pub(crate) fn from_adjacency(labels: Vec<String>, adj: Vec<Vec<VertexId>>) -> UGraph {
        debug_assert_eq!(labels.len(), adj.len());
        debug_assert!(adj
            .iter()
            .enumerate()
            .all(|(u, l)| l.windows(2).all(|w| w[0] < w[1]) && !l.contains(&u)));
        UGraph { labels, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<VertexId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in 0..self.vertex_count() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// Copy with extra edges added (duplicates collapse).
    pub fn with_extra_edges(&self, extra: &[(VertexId, VertexId)]) -> Result<UGraph> {
        let mut edges = self.edges();
        edges.extend_from_slice(extra);
        UGraph::new(self.labels.clone(), &edges)
    }

    /// Subgraph on `keep`, relabeled densely in ascending id order.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Result<UGraph> {
        check_ids(self.vertex_count(), keep)?;
        let old_ids: Vec<VertexId> = keep.iter().collect();
        let labels: Vec<String> = old_ids.iter().map(|&v| self.labels[v].clone()).collect();
        let mut edges = Vec::new();
        for (new_u, &u) in old_ids.iter().enumerate() {
            for &v in &self.adj[u] {
                if let Ok(new_v) = old_ids.binary_search(&v) {
                    if new_u < new_v {
                        edges.push((new_u, new_v));
                    }
                }
            }
        }
        UGraph::new(labels, &edges)
    }

    /// Connected component of `seed` in the graph with `removed` deleted.
    pub fn connected_component(&self, removed: &VertexSet, seed: VertexId) -> Result<VertexSet> {
        let n = self.vertex_count();
        check_ids(n, removed)?;
        if seed >= n {
            return Err(Error::InvalidVertex(seed));
        }
        if removed.contains(seed) {
            return Err(Error::Precondition(
                "seed vertex is in the removed set".into(),
            ));
        }
        let mut seen = vec![false; n];
        seen[seed] = true;
        let mut stack = vec![seed];
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] && !removed.contains(w) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        Ok((0..n).filter(|&v| seen[v]).collect())
    }

    /// Vertices outside `comp` adjacent to at least one vertex of `comp`.
    pub fn boundary(&self, comp: &VertexSet) -> Result<VertexSet> {
        check_ids(self.vertex_count(), comp)?;
        let mut out = VertexSet::new();
        for v in comp.iter() {
            for &w in &self.adj[v] {
                if !comp.contains(w) {
                    out.insert(w);
                }
            }
        }
        Ok(out)
    }

    /// True iff every path between a vertex of `u` and a vertex of `w`
    /// intersects `z`. Implemented as reachability with `z` removed.
    pub fn separated(&self, u: &VertexSet, w: &VertexSet, z: &VertexSet) -> Result<bool> {
        let n = self.vertex_count();
        check_ids(n, u)?;
        check_ids(n, w)?;
        check_ids(n, z)?;
        if !u.is_disjoint(z) || !w.is_disjoint(z) || !u.is_disjoint(w) {
            return Err(Error::Overlap("u, w, z must be pairwise disjoint".into()));
        }
        if u.is_empty() || w.is_empty() {
            return Ok(true);
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<VertexId> = u.iter().collect();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            if w.contains(v) {
                return Ok(false);
            }
            for &x in &self.adj[v] {
                if !seen[x] && !z.contains(x) {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        Ok(true)
    }

    /// Single-pair form of [`UGraph::separated`].
    pub fn u_separated(&self, a: VertexId, y: VertexId, z: &VertexSet) -> Result<bool> {
        if a == y {
            return Err(Error::Overlap("a and y must differ".into()));
        }
        if z.contains(a) || z.contains(y) {
            return Err(Error::Overlap("z must not contain a or y".into()));
        }
        self.separated(&VertexSet::singleton(a), &VertexSet::singleton(y), z)
    }

    pub fn format_set(&self, s: &VertexSet) -> String {
        let names: Vec<&str> = s.iter().map(|v| self.label(v)).collect();
        format!("{{{}}}", names.join(", "))
    }
}
