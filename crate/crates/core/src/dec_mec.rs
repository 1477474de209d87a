//! MEC decomposition under player-1 edge deletions.
//!
//! The structure keeps the pure MDP graph: the subgraph of edges that lie
//! inside non-trivial MECs. Its non-trivial SCCs are exactly the MECs, so
//! same-MEC queries are SCC queries. When a deletion splits a MEC, the new
//! SCCs are examined smallest-first; random vertices with edges leaving
//! their SCC and their random attractor are cut out, and whatever splits off
//! in turn is examined again.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::dec_scc::{DecSccEngine, SccHandle};
use crate::graph::AttractorScratch;
use crate::graph_streett::lockstep;
use crate::mec::{mec_decomposition_with, MecDecomposition, MecOptions};
use crate::model::{Edge, MdpModel, Owner, Vertex, VertexSet};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecMecError {
    #[error("edge ({u}, {v}) does not start at a player-1 vertex")]
    NotPlayerEdge { u: Vertex, v: Vertex },
    #[error("edge ({u}, {v}) is not an edge of the model")]
    UnknownEdge { u: Vertex, v: Vertex },
    #[error("edge ({u}, {v}) was already deleted")]
    AlreadyDeleted { u: Vertex, v: Vertex },
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: Vertex, n: usize },
}

/// The worklist at the top of an iteration of the update loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorklistSnapshot {
    /// Member sets of the SCCs of every queued list.
    pub lists: Vec<Vec<VertexSet>>,
    /// SCC partition of the maintained graph.
    pub partition: Vec<VertexSet>,
    /// Live edges of the maintained graph.
    pub edges: Vec<Edge>,
}

pub type WorklistObserver<'a> = &'a mut dyn FnMut(&WorklistSnapshot);

pub struct DecMec {
    model: MdpModel,
    engine: DecSccEngine,
    deleted: Vec<bool>,
    strict: bool,
    scratch: AttractorScratch,
    released: Vec<Vertex>,
}

impl DecMec {
    pub fn new(model: &MdpModel) -> Self {
        Self::with_seed(model, 0)
    }

    pub fn with_seed(model: &MdpModel, seed: u64) -> Self {
        let n = model.vertex_count();
        let options = MecOptions {
            include_trivial: false,
            seed,
        };
        let decomposition = mec_decomposition_with(model, options).decomposition;
        let mec_of = decomposition.mec_index(n);
        let kept: Vec<Edge> = model
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| mec_of[u].is_some() && mec_of[u] == mec_of[v])
            .collect();
        DecMec {
            model: model.clone(),
            engine: DecSccEngine::from_edges(n, kept, seed).expect("edges of a valid model"),
            deleted: vec![false; model.edge_count()],
            strict: true,
            scratch: AttractorScratch::new(n),
            released: Vec::new(),
        }
    }

    /// Strict mode (the default) rejects deleting an edge twice; otherwise
    /// repeated deletions are ignored.
    pub fn set_strict(&mut self, strict: bool) {
        self.strict = strict;
    }

    pub fn engine(&self) -> &DecSccEngine {
        &self.engine
    }

    /// Vertices that left every non-trivial MEC since the last call, in the
    /// order they left.
    pub fn take_released(&mut self) -> Vec<Vertex> {
        std::mem::take(&mut self.released)
    }

    /// The MDP with every deleted edge removed.
    pub fn current_model(&self) -> MdpModel {
        let mut id = 0;
        self.model.filter_edges(|_| {
            id += 1;
            !self.deleted[id - 1]
        })
    }

    /// Edges removed from the pure MDP graph so far, in order.
    pub fn deletion_trace(&self) -> &[Edge] {
        self.engine.trace()
    }

    pub fn same_mec(&self, u: Vertex, v: Vertex) -> bool {
        if u == v {
            return !self.model.is_random(u) || !self.engine.is_trivial(self.engine.rep(u));
        }
        self.engine.query(u, v)
    }

    /// The non-trivial MEC containing `v`, if any.
    pub fn mec_of(&self, v: Vertex) -> Option<SccHandle> {
        let h = self.engine.rep(v);
        (!self.engine.is_trivial(h)).then_some(h)
    }

    pub fn members(&self, h: SccHandle) -> VertexSet {
        self.engine.member_set(h)
    }

    /// Non-trivial MECs sorted by smallest member.
    pub fn mecs(&self) -> Vec<VertexSet> {
        self.engine
            .components()
            .into_iter()
            .filter(|&h| !self.engine.is_trivial(h))
            .map(|h| self.engine.member_set(h))
            .collect()
    }

    pub fn decomposition(&self) -> MecDecomposition {
        let mecs = self.mecs();
        let covered: VertexSet = mecs.iter().flat_map(|m| m.iter()).collect();
        let all: VertexSet = (0..self.model.vertex_count()).collect();
        MecDecomposition {
            residue: all.difference(&covered),
            mecs,
        }
    }

    fn check(&self, (u, v): Edge) -> Result<Option<usize>, DecMecError> {
        let n = self.model.vertex_count();
        for x in [u, v] {
            if x >= n {
                return Err(DecMecError::VertexOutOfRange { vertex: x, n });
            }
        }
        let id = self
            .model
            .edge_id(u, v)
            .ok_or(DecMecError::UnknownEdge { u, v })?;
        if self.model.owner(u) != Owner::Player1 {
            return Err(DecMecError::NotPlayerEdge { u, v });
        }
        if self.deleted[id] {
            if self.strict {
                return Err(DecMecError::AlreadyDeleted { u, v });
            }
            return Ok(None);
        }
        Ok(Some(id))
    }

    /// Deletes one player-1 edge and returns the non-trivial MECs it
    /// created, sorted by smallest member.
    pub fn delete_player_edge(&mut self, u: Vertex, v: Vertex) -> Result<Vec<SccHandle>, DecMecError> {
        self.delete_player_edge_observed(u, v, None)
    }

    pub fn delete_player_edge_observed(
        &mut self,
        u: Vertex,
        v: Vertex,
        observer: Option<WorklistObserver<'_>>,
    ) -> Result<Vec<SccHandle>, DecMecError> {
        let Some(id) = self.check((u, v))? else {
            return Ok(Vec::new());
        };
        self.deleted[id] = true;
        Ok(self.update(u, v, observer))
    }

    /// Deletes the edges one after another. Returns the MECs created by the
    /// whole batch that are still MECs at its end.
    pub fn delete_player_edges(&mut self, edges: &[Edge]) -> Result<Vec<SccHandle>, DecMecError> {
        for &e in edges {
            self.check(e)?;
        }
        let mut announced = Vec::new();
        for &(u, v) in edges {
            announced.extend(self.delete_player_edge(u, v)?);
        }
        announced.sort_unstable();
        announced.dedup();
        announced.retain(|&h| !self.engine.is_trivial(h));
        announced.sort_unstable_by_key(|&h| self.engine.min_member(h));
        Ok(announced)
    }

    fn update(&mut self, u: Vertex, v: Vertex, mut observer: Option<WorklistObserver<'_>>) -> Vec<SccHandle> {
        if !self.engine.has_edge(u, v) {
            return Vec::new();
        }
        if u == v && self.engine.size(self.engine.rep(u)) == 1 {
            // Losing its self-loop turns a one-vertex MEC trivial.
            self.engine.delete(&[(u, u)]).expect("edge is live");
            self.released.push(u);
            return Vec::new();
        }
        let first = self
            .engine
            .delete_announce(&[(u, v)])
            .expect("edge is live");
        let mut worklist: VecDeque<Vec<SccHandle>> = VecDeque::new();
        if !first.is_empty() {
            worklist.push_back(first);
        }
        let mut certified = Vec::new();
        loop {
            if let Some(obs) = observer.as_mut() {
                obs(&self.snapshot(&worklist));
            }
            let Some(list) = worklist.pop_front() else {
                break;
            };
            self.process(list, &mut worklist, &mut certified);
        }
        certified.sort_unstable_by_key(|&h| self.engine.min_member(h));
        certified
    }

    fn snapshot(&self, worklist: &VecDeque<Vec<SccHandle>>) -> WorklistSnapshot {
        WorklistSnapshot {
            lists: worklist
                .iter()
                .map(|l| l.iter().map(|&h| self.engine.member_set(h)).collect())
                .collect(),
            partition: self.engine.partition(),
            edges: self.engine.live_edges(),
        }
    }

    /// Handles one list of SCCs that used to form a single MEC (or a piece
    /// of one). Lists arrive sorted by smallest member.
    fn process(
        &mut self,
        list: Vec<SccHandle>,
        worklist: &mut VecDeque<Vec<SccHandle>>,
        certified: &mut Vec<SccHandle>,
    ) {
        // Reversed so that among equally large SCCs the one with the smallest
        // member survives the race.
        let sizes: Vec<usize> = list.iter().rev().map(|&h| self.engine.size(h)).collect();
        let race = lockstep(&sizes);
        let largest = list[list.len() - 1 - race.survivor];
        let mut smaller: Vec<SccHandle> = list.iter().copied().filter(|&h| h != largest).collect();
        smaller.sort_unstable_by_key(|&h| self.engine.min_member(h));

        // Random vertices with an edge leaving their SCC, per SCC. An SCC
        // without an entry is still a MEC candidate.
        let mut escapes: HashMap<SccHandle, Vec<Vertex>> = HashMap::new();
        for &c in &smaller {
            let mut cross: Vec<Edge> = Vec::new();
            for &x in self.engine.members(c) {
                for e in self.engine.incident_edges(x) {
                    let (s, t) = e;
                    let (cs, ct) = (self.engine.rep(s), self.engine.rep(t));
                    if cs == ct {
                        continue;
                    }
                    cross.push(e);
                    // Cross edges of SCCs scanned later are deleted here, so
                    // their escapes have to be recorded now.
                    if self.model.is_random(s) {
                        escapes.entry(cs).or_default().push(s);
                    }
                }
            }
            cross.sort_unstable();
            cross.dedup();
            self.engine.delete(&cross).expect("cross edges are live");
            if let Some(u_c) = escapes.remove(&c) {
                self.cut_attractor(c, u_c, worklist);
            } else if self.engine.is_trivial(c) {
                self.released.push(self.engine.min_member(c));
            } else {
                certified.push(c);
            }
        }
        if let Some(u_1) = escapes.remove(&largest) {
            self.cut_attractor(largest, u_1, worklist);
        } else if self.engine.is_trivial(largest) {
            self.released.push(self.engine.min_member(largest));
        } else {
            certified.push(largest);
        }
        debug_assert!(escapes.is_empty());
    }

    /// Removes `attr_R(escapes) ∩ C` from the graph and queues the SCCs that
    /// split off, except the isolated attractor vertices.
    fn cut_attractor(
        &mut self,
        c: SccHandle,
        mut escapes: Vec<Vertex>,
        worklist: &mut VecDeque<Vec<SccHandle>>,
    ) {
        escapes.sort_unstable();
        escapes.dedup();
        let engine = &self.engine;
        let model = &self.model;
        let attr = self.scratch.attract(
            &escapes,
            |v| model.owner(v),
            |v| engine.out_degree(v),
            |v, f| {
                for p in engine.predecessors(v) {
                    if engine.rep(p) == c {
                        f(p);
                    }
                }
            },
        );
        let mut batch: Vec<Edge> = attr
            .iter()
            .flat_map(|&a| self.engine.incident_edges(a))
            .collect();
        batch.sort_unstable();
        batch.dedup();
        let mut in_attr = attr.clone();
        in_attr.sort_unstable();
        self.released.extend_from_slice(&in_attr);
        let mut pieces = self
            .engine
            .delete_announce(&batch)
            .expect("attractor edges are live");
        pieces.retain(|&h| in_attr.binary_search(&self.engine.min_member(h)).is_err());
        if !pieces.is_empty() {
            worklist.push_back(pieces);
        }
    }
}
