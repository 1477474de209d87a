//! Explicit-state MDPs, Streett pairs and sorted vertex sets.
//!
//! An [`MdpModel`] stores only the edge support of the transition function:
//! almost-sure questions never depend on the actual probabilities, so a
//! random vertex is treated as choosing uniformly among its successors.
//! A graph is simply a model without random vertices.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

/// Vertex identifier, always in `0..n`.
pub type Vertex = usize;

/// A directed edge `(source, target)`.
pub type Edge = (Vertex, Vertex);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Player1,
    Random,
}

impl Owner {
    pub fn is_random(self) -> bool {
        matches!(self, Owner::Random)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(Vertex, Vertex),
    #[error("random vertex {0} has out-degree 0")]
    RandomSink(Vertex),
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    /// Sorts and deduplicates `ids`.
    pub fn from_vec(mut ids: Vec<Vertex>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn smallest(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, Vertex>> {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut ids = Vec::with_capacity(self.len() + other.len());
        ids.extend_from_slice(&self.0);
        ids.extend_from_slice(&other.0);
        VertexSet::from_vec(ids)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().any(|v| large.contains(v))
    }

    pub fn check_range(&self, n: usize) -> Result<(), ModelError> {
        match self.0.last() {
            Some(&v) if v >= n => Err(ModelError::VertexOutOfRange { vertex: v, n }),
            _ => Ok(()),
        }
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for v in self.iter() {
            mask[v] = true;
        }
        mask
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        VertexSet(
            mask.iter()
                .enumerate()
                .filter_map(|(v, &m)| m.then_some(v))
                .collect(),
        )
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        VertexSet::from_vec(iter.into_iter().collect())
    }
}

impl From<Vec<Vertex>> for VertexSet {
    fn from(ids: Vec<Vertex>) -> Self {
        VertexSet::from_vec(ids)
    }
}

impl<const N: usize> From<[Vertex; N]> for VertexSet {
    fn from(ids: [Vertex; N]) -> Self {
        VertexSet::from_vec(ids.to_vec())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = Vertex;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Vertex>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Vertex-partitioned directed graph with edge support only.
///
/// Edges are kept sorted by `(source, target)`; an edge id is its index in
/// that order. Out-edges of `v` occupy the contiguous id range
/// [`MdpModel::out_edge_ids`], in-edges are listed through a separate index.
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpModel {
    owners: Vec<Owner>,
    edges: Vec<Edge>,
    out_start: Vec<usize>,
    in_start: Vec<usize>,
    in_edges: Vec<usize>,
}

impl MdpModel {
    /// Builds a validated input model: endpoints in range, no duplicate
    /// edges, and every random vertex has a successor.
    pub fn new(owners: Vec<Owner>, edges: Vec<Edge>) -> Result<Self, ModelError> {
        let model = Self::derived(owners, edges)?;
        if let Some(v) = (0..model.vertex_count())
            .find(|&v| model.owner(v).is_random() && model.out_degree(v) == 0)
        {
            return Err(ModelError::RandomSink(v));
        }
        Ok(model)
    }

    /// Like [`MdpModel::new`] but tolerates random sinks, which appear in
    /// working copies produced by deletions.
    pub fn derived(owners: Vec<Owner>, mut edges: Vec<Edge>) -> Result<Self, ModelError> {
        let n = owners.len();
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        for &(u, v) in &edges {
            let bad = if u >= n { u } else { v };
            if u >= n || v >= n {
                return Err(ModelError::VertexOutOfRange { vertex: bad, n });
            }
        }

        let mut out_start = vec![0usize; n + 1];
        let mut in_start = vec![0usize; n + 1];
        for &(u, v) in &edges {
            out_start[u + 1] += 1;
            in_start[v + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
            in_start[i + 1] += in_start[i];
        }
        let mut fill = in_start.clone();
        let mut in_edges = vec![0usize; edges.len()];
        // Edge ids are visited in (source, target) order, so each in-list ends
        // up sorted by source.
        for (id, &(_, v)) in edges.iter().enumerate() {
            in_edges[fill[v]] = id;
            fill[v] += 1;
        }

        Ok(MdpModel {
            owners,
            edges,
            out_start,
            in_start,
            in_edges,
        })
    }

    /// A graph: every vertex is a player-1 vertex.
    pub fn graph(n: usize, edges: Vec<Edge>) -> Result<Self, ModelError> {
        Self::new(vec![Owner::Player1; n], edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.owners.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn owner(&self, v: Vertex) -> Owner {
        self.owners[v]
    }

    pub fn owners(&self) -> &[Owner] {
        &self.owners
    }

    pub fn is_random(&self, v: Vertex) -> bool {
        self.owners[v].is_random()
    }

    /// True when the model has no random vertices.
    pub fn is_graph(&self) -> bool {
        self.owners.iter().all(|o| !o.is_random())
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<usize> {
        if u >= self.vertex_count() {
            return None;
        }
        let range = self.out_edge_ids(u);
        let start = range.start;
        self.edges[range]
            .binary_search_by_key(&v, |&(_, t)| t)
            .ok()
            .map(|i| start + i)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some()
    }

    pub fn out_edge_ids(&self, v: Vertex) -> Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    pub fn in_edge_ids(&self, v: Vertex) -> &[usize] {
        &self.in_edges[self.in_start[v]..self.in_start[v + 1]]
    }

    /// `Out(v)` in ascending order.
    pub fn successors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.edges[self.out_edge_ids(v)].iter().map(|&(_, t)| t)
    }

    /// `In(v)` in ascending order.
    pub fn predecessors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.in_edge_ids(v).iter().map(|&id| self.edges[id].0)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_start[v + 1] - self.out_start[v]
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_start[v + 1] - self.in_start[v]
    }

    /// Copy of this model keeping only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(Edge) -> bool) -> MdpModel {
        let edges = self.edges.iter().copied().filter(|&e| keep(e)).collect();
        MdpModel::derived(self.owners.clone(), edges).expect("subset of a valid edge set")
    }
}

/// One request/grant pair `(L_j, U_j)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreettPair {
    pub requests: VertexSet,
    pub grants: VertexSet,
}

impl StreettPair {
    pub fn new(requests: impl Into<VertexSet>, grants: impl Into<VertexSet>) -> Self {
        StreettPair {
            requests: requests.into(),
            grants: grants.into(),
        }
    }
}

/// A k-pair Streett objective.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreettSpec {
    pairs: Vec<StreettPair>,
}

impl StreettSpec {
    pub fn new(pairs: Vec<StreettPair>) -> Self {
        StreettSpec { pairs }
    }

    pub fn empty() -> Self {
        StreettSpec::default()
    }

    pub fn pairs(&self) -> &[StreettPair] {
        &self.pairs
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    /// Description size `b = Σ_j |L_j| + |U_j|`.
    pub fn size(&self) -> usize {
        self.pairs
            .iter()
            .map(|p| p.requests.len() + p.grants.len())
            .sum()
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        for p in &self.pairs {
            p.requests.check_range(n)?;
            p.grants.check_range(n)?;
        }
        Ok(())
    }

    /// True when every pair is satisfied by a play visiting exactly `set`
    /// infinitely often.
    pub fn satisfied_by(&self, set: &VertexSet) -> bool {
        self.pairs
            .iter()
            .all(|p| !p.requests.intersects(set) || p.grants.intersects(set))
    }
}

/// A model together with its objective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub model: MdpModel,
    pub spec: StreettSpec,
}
