//! Decremental SCC maintenance with component handles and announcements.
//!
//! The engine keeps the SCC partition of a graph under batched edge
//! deletions. After a batch, every component that lost an internal edge is
//! re-decomposed on its own members. The largest piece keeps the old
//! handle; the smaller pieces get fresh handles, and only their incident
//! edges are scanned to repair the per-component edge counters. A vertex
//! lands in a small piece at most `⌈log₂ n⌉` times since each such piece is
//! at most half of the component it came from.
//!
//! The seed only permutes internal processing order (and hence which handle
//! ids get allocated to which pieces). Partitions, counters and every
//! announcement list, which is sorted by smallest member, are
//! seed-independent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Successors, TarjanScratch};
use crate::model::{Edge, MdpModel, Vertex, VertexSet};

/// Stable reference to one SCC of the engine's current graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SccHandle(u32);

impl SccHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[cfg(test)]
    pub(crate) fn from_index(i: usize) -> Self {
        SccHandle(i as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecSccError {
    #[error("edge ({u}, {v}) is not an edge of the graph")]
    UnknownEdge { u: Vertex, v: Vertex },
    #[error("edge ({u}, {v}) was already deleted")]
    AlreadyDeleted { u: Vertex, v: Vertex },
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: Vertex, n: usize },
}

#[derive(Clone, Debug)]
struct Component {
    members: Vec<Vertex>,
    min: Vertex,
    /// Edges leaving the component.
    outgoing: usize,
    /// Edges with both endpoints inside, self-loops included.
    internal: usize,
}

/// Live edges grouped by one endpoint. Each vertex owns a fixed range of
/// `slots`, whose first `len[v]` entries are its live `(edge id, other
/// endpoint)` pairs.
#[derive(Clone, Debug)]
struct Adjacency {
    start: Vec<u32>,
    len: Vec<u32>,
    slots: Vec<(u32, u32)>,
    /// Slot of each edge.
    pos: Vec<u32>,
}

impl Adjacency {
    /// `ends` yields `(owner, other)` for every edge id in order.
    fn build(n: usize, ends: impl Iterator<Item = (Vertex, Vertex)> + Clone) -> Self {
        let mut start = vec![0u32; n + 1];
        for (a, _) in ends.clone() {
            start[a + 1] += 1;
        }
        for v in 0..n {
            start[v + 1] += start[v];
        }
        let m = start[n] as usize;
        let mut len = vec![0u32; n];
        let mut slots = vec![(0u32, 0u32); m];
        let mut pos = vec![0u32; m];
        for (id, (a, b)) in ends.enumerate() {
            let slot = start[a] + len[a];
            len[a] += 1;
            slots[slot as usize] = (id as u32, b as u32);
            pos[id] = slot;
        }
        Adjacency {
            start,
            len,
            slots,
            pos,
        }
    }

    #[inline]
    fn list(&self, v: Vertex) -> &[(u32, u32)] {
        let s = self.start[v] as usize;
        &self.slots[s..s + self.len[v] as usize]
    }

    fn remove(&mut self, id: usize, owner: Vertex) {
        let slot = self.pos[id] as usize;
        self.len[owner] -= 1;
        let last = (self.start[owner] + self.len[owner]) as usize;
        self.slots.swap(slot, last);
        self.pos[self.slots[slot].0 as usize] = slot as u32;
    }
}

pub struct DecSccEngine {
    n: usize,
    edges: Vec<Edge>,
    alive: Vec<bool>,
    live_edges: usize,
    out_adj: Adjacency,
    in_adj: Adjacency,
    comp_of: Vec<u32>,
    comps: Vec<Component>,
    comp_stamp: Vec<u64>,
    /// Batch that last deleted an outgoing edge of each component.
    touch_stamp: Vec<u64>,
    stamp: u64,
    small_charges: Vec<u32>,
    trace: Vec<Edge>,
    strict: bool,
    skipped: usize,
    rng: ChaCha8Rng,
    tarjan: TarjanScratch,
}

struct ComponentView<'a> {
    out_adj: &'a Adjacency,
    comp_of: &'a [u32],
    comp: u32,
}

impl Successors for ComponentView<'_> {
    fn out_len(&self, v: Vertex) -> usize {
        self.out_adj.len[v] as usize
    }

    fn successor(&self, v: Vertex, i: usize) -> Option<Vertex> {
        let w = self.out_adj.list(v)[i].1 as usize;
        (self.comp_of[w] == self.comp).then_some(w)
    }
}

impl DecSccEngine {
    pub fn new(model: &MdpModel) -> Self {
        Self::with_seed(model, 0)
    }

    pub fn with_seed(model: &MdpModel, seed: u64) -> Self {
        Self::from_sorted_edges(model.vertex_count(), model.edges().to_vec(), seed)
    }

    /// Engine over `n` vertices and the given edges; duplicates are merged.
    pub fn from_edges(n: usize, mut edges: Vec<Edge>, seed: u64) -> Result<Self, DecSccError> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            let vertex = if u >= n { u } else { v };
            return Err(DecSccError::VertexOutOfRange { vertex, n });
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted_edges(n, edges, seed))
    }

    fn from_sorted_edges(n: usize, edges: Vec<Edge>, seed: u64) -> Self {
        let m = edges.len();
        let out_adj = Adjacency::build(n, edges.iter().copied());
        let in_adj = Adjacency::build(n, edges.iter().map(|&(u, v)| (v, u)));
        let mut engine = DecSccEngine {
            n,
            edges,
            alive: vec![true; m],
            live_edges: m,
            out_adj,
            in_adj,
            comp_of: vec![0; n],
            comps: Vec::new(),
            comp_stamp: Vec::new(),
            touch_stamp: Vec::new(),
            stamp: 0,
            small_charges: vec![0; n],
            trace: Vec::new(),
            strict: true,
            skipped: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tarjan: TarjanScratch::new(n),
        };
        engine.initialize();
        engine
    }

    fn initialize(&mut self) {
        let mut roots: Vec<Vertex> = (0..self.n).collect();
        roots.shuffle(&mut self.rng);
        // Everything starts in component 0 so the view admits every edge.
        let view = ComponentView {
            out_adj: &self.out_adj,
            comp_of: &self.comp_of,
            comp: 0,
        };
        let pieces = self.tarjan.run(&roots, &view);
        for piece in pieces {
            let id = self.comps.len() as u32;
            for &v in &piece {
                self.comp_of[v] = id;
            }
            let min = *piece.iter().min().expect("tarjan pieces are non-empty");
            self.comps.push(Component {
                members: piece,
                min,
                outgoing: 0,
                internal: 0,
            });
            self.comp_stamp.push(0);
            self.touch_stamp.push(0);
        }
        for &(u, v) in &self.edges {
            let c = self.comp_of[u] as usize;
            if self.comp_of[v] as usize == c {
                self.comps[c].internal += 1;
            } else {
                self.comps[c].outgoing += 1;
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Number of edges not yet deleted.
    pub fn edge_count(&self) -> usize {
        self.live_edges
    }

    /// Strict mode (the default) rejects deletions of edges that are already
    /// gone. Otherwise such deletions are skipped and counted.
    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    /// Deletions skipped in non-strict mode.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn rep(&self, u: Vertex) -> SccHandle {
        SccHandle(self.comp_of[u])
    }

    pub fn query(&self, u: Vertex, v: Vertex) -> bool {
        self.comp_of[u] == self.comp_of[v]
    }

    /// Members of the component, in no particular order.
    pub fn members(&self, h: SccHandle) -> &[Vertex] {
        &self.comps[h.index()].members
    }

    pub fn member_set(&self, h: SccHandle) -> VertexSet {
        VertexSet::from_vec(self.members(h).to_vec())
    }

    pub fn size(&self, h: SccHandle) -> usize {
        self.comps[h.index()].members.len()
    }

    pub fn min_member(&self, h: SccHandle) -> Vertex {
        self.comps[h.index()].min
    }

    /// Number of live edges leaving the component.
    pub fn outgoing(&self, h: SccHandle) -> usize {
        self.comps[h.index()].outgoing
    }

    /// Number of live edges with both endpoints in the component.
    pub fn internal_edges(&self, h: SccHandle) -> usize {
        self.comps[h.index()].internal
    }

    pub fn is_bottom(&self, h: SccHandle) -> bool {
        self.outgoing(h) == 0
    }

    /// A single vertex without a self-loop.
    pub fn is_trivial(&self, h: SccHandle) -> bool {
        self.internal_edges(h) == 0
    }

    /// Current components sorted by smallest member.
    pub fn components(&self) -> Vec<SccHandle> {
        let mut hs: Vec<SccHandle> = (0..self.n)
            .filter(|&v| self.comps[self.comp_of[v] as usize].min == v)
            .map(|v| SccHandle(self.comp_of[v]))
            .collect();
        hs.sort_unstable_by_key(|&h| self.min_member(h));
        hs
    }

    /// Current partition sorted by smallest member.
    pub fn partition(&self) -> Vec<VertexSet> {
        self.components()
            .into_iter()
            .map(|h| self.member_set(h))
            .collect()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edge_id(u, v).is_some_and(|id| self.alive[id])
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_adj.len[v] as usize
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_adj.len[v] as usize
    }

    /// Live successors of `v`, in no particular order.
    pub fn successors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out_adj.list(v).iter().map(|&(_, w)| w as usize)
    }

    /// Live predecessors of `v`, in no particular order.
    pub fn predecessors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.in_adj.list(v).iter().map(|&(_, u)| u as usize)
    }

    /// Live edges incident to `v` (out-edges, then in-edges; a self-loop
    /// appears twice).
    pub fn incident_edges(&self, v: Vertex) -> impl Iterator<Item = Edge> + '_ {
        let out = self.out_adj.list(v).iter().map(move |&(_, w)| (v, w as usize));
        out.chain(self.in_adj.list(v).iter().map(move |&(_, u)| (u as usize, v)))
    }

    /// Live edges, sorted.
    pub fn live_edges(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&e, _)| e)
            .collect()
    }

    /// Every edge deleted so far, in deletion order.
    pub fn trace(&self) -> &[Edge] {
        &self.trace
    }

    /// Per vertex: how many times it ended up in a small piece of a split.
    pub fn small_charges(&self) -> &[u32] {
        &self.small_charges
    }

    fn edge_id(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.edges.binary_search(&(u, v)).ok()
    }

    /// Deletes the batch without reporting anything.
    pub fn delete(&mut self, batch: &[Edge]) -> Result<(), DecSccError> {
        self.apply(batch).map(|_| ())
    }

    /// Deletes the batch and returns every component created by a split,
    /// including the largest piece that keeps its old handle.
    pub fn delete_announce(&mut self, batch: &[Edge]) -> Result<Vec<SccHandle>, DecSccError> {
        self.apply(batch).map(|o| o.pieces)
    }

    /// Deletes the batch and returns every component that is bottom now but
    /// was not a bottom component before the batch: bottom pieces of splits
    /// and unsplit components that lost their last outgoing edge.
    pub fn delete_announce_no_outgoing(
        &mut self,
        batch: &[Edge],
    ) -> Result<Vec<SccHandle>, DecSccError> {
        self.apply(batch).map(|o| o.new_bottom)
    }

    fn validate(&self, batch: &[Edge]) -> Result<Vec<usize>, DecSccError> {
        let mut ids = Vec::with_capacity(batch.len());
        for &(u, v) in batch {
            for x in [u, v] {
                if x >= self.n {
                    return Err(DecSccError::VertexOutOfRange { vertex: x, n: self.n });
                }
            }
            let id = self.edge_id(u, v).ok_or(DecSccError::UnknownEdge { u, v })?;
            if self.strict && !self.alive[id] {
                return Err(DecSccError::AlreadyDeleted { u, v });
            }
            ids.push(id);
        }
        if self.strict {
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                let (u, v) = self.edges[w[0]];
                return Err(DecSccError::AlreadyDeleted { u, v });
            }
        }
        Ok(ids)
    }

    fn next_stamp(&mut self) -> u64 {
        self.stamp += 1;
        self.stamp
    }

    fn apply(&mut self, batch: &[Edge]) -> Result<Outcome, DecSccError> {
        let ids = self.validate(batch)?;
        Ok(self.apply_ids(ids))
    }

    pub(crate) fn out_edge_ids(&self, v: Vertex) -> impl Iterator<Item = usize> + '_ {
        self.out_adj.list(v).iter().map(|&(id, _)| id as usize)
    }

    pub(crate) fn in_edge_ids(&self, v: Vertex) -> impl Iterator<Item = usize> + '_ {
        self.in_adj.list(v).iter().map(|&(id, _)| id as usize)
    }

    pub(crate) fn edge_at(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// [`Self::delete_announce_no_outgoing`] for distinct live edge ids.
    pub(crate) fn delete_ids_no_outgoing(&mut self, ids: Vec<usize>) -> Vec<SccHandle> {
        debug_assert!(ids.iter().all(|&id| self.alive[id]));
        self.apply_ids(ids).new_bottom
    }

    fn apply_ids(&mut self, ids: Vec<usize>) -> Outcome {
        let batch_stamp = self.next_stamp();
        let mut affected: Vec<u32> = Vec::new();
        let mut touched: Vec<u32> = Vec::new();
        for id in ids {
            if !self.alive[id] {
                self.skipped += 1;
                continue;
            }
            self.remove_edge(id);
            let (u, v) = self.edges[id];
            let cu = self.comp_of[u];
            if cu == self.comp_of[v] {
                self.comps[cu as usize].internal -= 1;
                if self.comp_stamp[cu as usize] != batch_stamp {
                    self.comp_stamp[cu as usize] = batch_stamp;
                    affected.push(cu);
                }
            } else {
                self.comps[cu as usize].outgoing -= 1;
                if self.touch_stamp[cu as usize] != batch_stamp {
                    self.touch_stamp[cu as usize] = batch_stamp;
                    touched.push(cu);
                }
            }
        }

        affected.shuffle(&mut self.rng);
        let mut pieces: Vec<SccHandle> = Vec::new();
        let split_stamp = self.next_stamp();
        for c in affected {
            if let Some(ps) = self.split(c, split_stamp) {
                pieces.extend(ps);
            }
        }

        let mut new_bottom: Vec<SccHandle> = pieces
            .iter()
            .copied()
            .filter(|&h| self.is_bottom(h))
            .collect();
        for c in touched {
            // Split components are represented by their pieces.
            if self.comp_stamp[c as usize] != split_stamp && self.comps[c as usize].outgoing == 0 {
                new_bottom.push(SccHandle(c));
            }
        }
        self.sort_handles(&mut pieces);
        self.sort_handles(&mut new_bottom);
        Outcome { pieces, new_bottom }
    }

    fn sort_handles(&self, hs: &mut [SccHandle]) {
        let mut keyed: Vec<(Vertex, SccHandle)> = hs.iter().map(|&h| (self.min_member(h), h)).collect();
        keyed.sort_unstable_by_key(|&(min, _)| min);
        for (slot, (_, h)) in hs.iter_mut().zip(keyed) {
            *slot = h;
        }
    }

    fn remove_edge(&mut self, id: usize) {
        self.alive[id] = false;
        self.live_edges -= 1;
        self.trace.push(self.edges[id]);
        let (u, v) = self.edges[id];
        self.out_adj.remove(id, u);
        self.in_adj.remove(id, v);
    }

    /// Re-decomposes component `c`. Returns all pieces if it split.
    fn split(&mut self, c: u32, split_stamp: u64) -> Option<Vec<SccHandle>> {
        let mut roots = std::mem::take(&mut self.comps[c as usize].members);
        roots.shuffle(&mut self.rng);
        let view = ComponentView {
            out_adj: &self.out_adj,
            comp_of: &self.comp_of,
            comp: c,
        };
        let mut pieces = self.tarjan.run(&roots, &view);
        if pieces.len() == 1 {
            self.comps[c as usize].members = roots;
            return None;
        }

        let mins: Vec<Vertex> = pieces
            .iter()
            .map(|p| *p.iter().min().expect("non-empty piece"))
            .collect();
        let large = (0..pieces.len())
            .max_by(|&a, &b| {
                pieces[a]
                    .len()
                    .cmp(&pieces[b].len())
                    .then(mins[b].cmp(&mins[a]))
            })
            .expect("at least two pieces");

        let internal_before = self.comps[c as usize].internal;
        let outgoing_before = self.comps[c as usize].outgoing;
        self.comp_stamp[c as usize] = split_stamp;
        let mut handles = vec![SccHandle(c)];
        let first_new = self.comps.len();
        let mut smalls: Vec<u32> = Vec::with_capacity(pieces.len() - 1);
        for (i, piece) in pieces.iter_mut().enumerate() {
            if i == large {
                continue;
            }
            let id = self.comps.len() as u32;
            for &v in piece.iter() {
                self.comp_of[v] = id;
                self.small_charges[v] += 1;
            }
            self.comps.push(Component {
                members: std::mem::take(piece),
                min: mins[i],
                outgoing: 0,
                internal: 0,
            });
            self.comp_stamp.push(split_stamp);
            self.touch_stamp.push(0);
            smalls.push(id);
            handles.push(SccHandle(id));
        }
        self.comps[c as usize].members = std::mem::take(&mut pieces[large]);
        self.comps[c as usize].min = mins[large];

        // Edges between different pieces of `c` leave the internal count of
        // `c`. Edges out of a small piece move from `c`'s outgoing count to
        // the piece, edges from the large piece into a small one are new
        // outgoing edges of the large piece.
        let mut cross = 0usize;
        let mut small_internal = 0usize;
        let mut small_to_outside = 0usize;
        let mut large_to_small = 0usize;
        for &p in &smalls {
            let (mut internal, mut outgoing) = (0usize, 0usize);
            for &x in &self.comps[p as usize].members {
                for &(_, y) in self.out_adj.list(x) {
                    let cy = self.comp_of[y as usize];
                    if cy == p {
                        internal += 1;
                    } else {
                        outgoing += 1;
                        if cy == c || cy as usize >= first_new {
                            cross += 1;
                        } else {
                            small_to_outside += 1;
                        }
                    }
                }
                for &(_, w) in self.in_adj.list(x) {
                    if self.comp_of[w as usize] == c {
                        large_to_small += 1;
                        cross += 1;
                    }
                }
            }
            let comp = &mut self.comps[p as usize];
            comp.internal = internal;
            comp.outgoing = outgoing;
            small_internal += internal;
        }
        let comp = &mut self.comps[c as usize];
        comp.internal = internal_before - small_internal - cross;
        comp.outgoing = outgoing_before - small_to_outside + large_to_small;
        Some(handles)
    }

    /// Recomputes the partition and all counters from scratch and compares
    /// them with the maintained state. Meant for tests.
    pub fn verify(&self) -> Result<(), String> {
        let model = MdpModel::derived(
            vec![crate::model::Owner::Player1; self.n],
            self.live_edges(),
        )
        .map_err(|e| e.to_string())?;
        let expected = crate::graph::tarjan_sccs(&model, None);
        let actual = self.partition();
        if expected != actual {
            return Err(format!("partition {actual:?} but recomputed {expected:?}"));
        }
        for h in self.components() {
            let members = self.member_set(h);
            if members.smallest() != Some(self.min_member(h)) {
                return Err(format!("stale min for {members}"));
            }
            let (mut internal, mut outgoing) = (0, 0);
            for v in &members {
                for w in model.successors(v) {
                    if members.contains(w) {
                        internal += 1;
                    } else {
                        outgoing += 1;
                    }
                }
            }
            if (internal, outgoing) != (self.internal_edges(h), self.outgoing(h)) {
                return Err(format!(
                    "counters of {members}: ({}, {}) but recounted ({internal}, {outgoing})",
                    self.internal_edges(h),
                    self.outgoing(h)
                ));
            }
        }
        Ok(())
    }
}

struct Outcome {
    pieces: Vec<SccHandle>,
    new_bottom: Vec<SccHandle>,
}
