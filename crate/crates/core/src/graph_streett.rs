//! Good-component detection and Streett winning sets on graphs.
//!
//! [`GoodCompRunner`] repeatedly takes a vertex set S off a queue, deletes
//! its bad vertices from the decremental SCC engine, and either reports
//! `G[S]` as a good component or splits off every SCC of at most half the
//! size of S into a set of its own. Each vertex is split off at most
//! `⌈log₂ n⌉` times.

use std::collections::VecDeque;

use thiserror::Error;

use crate::dec_scc::{DecSccEngine, SccHandle};
use crate::graph::{graph_reach, tarjan_sccs};
use crate::model::{Edge, MdpModel, ModelError, StreettSpec, Vertex, VertexSet};
use crate::streett_ds::{SetId, StreettSets};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StreettError {
    #[error("vertex {0} is a random vertex; the graph solver needs a graph")]
    RandomVertex(Vertex),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A non-trivial strongly connected vertex set in which every requested pair
/// is also granted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodComponent {
    pub members: VertexSet,
}

/// Counters collected while running [`GoodCompRunner`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoodCompStats {
    /// Outer-loop iterations.
    pub iterations: u64,
    /// Vertices visited by the lockstep enumeration.
    pub lockstep_steps: u64,
    /// Largest number of times a single vertex was split off into K.
    pub max_k_entries: u32,
    /// Total `|arg| + bits(arg)` over all set constructions and removals.
    pub ds_cost: u64,
}

/// State of the queue at the end of an outer-loop iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSnapshot {
    /// `(S, SCCs(S))` for every queued set, in queue order.
    pub sets: Vec<(VertexSet, Vec<VertexSet>)>,
}

pub type Observer<'a> = &'a mut dyn FnMut(&LoopSnapshot);

/// Result of the round-robin size race between components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Lockstep {
    /// Indices of the components that were fully enumerated while at least
    /// one other component was still running, in finishing order.
    pub finished: Vec<usize>,
    /// The last component still running; it is at least as large as every
    /// finished one.
    pub survivor: usize,
    pub steps: u64,
}

/// Enumerates the components round-robin, one vertex per component per
/// round, until a single one is left. Among equal sizes the component
/// listed first finishes first.
pub(crate) fn lockstep(sizes: &[usize]) -> Lockstep {
    assert!(!sizes.is_empty(), "lockstep over no components");
    let mut running: Vec<usize> = (0..sizes.len()).collect();
    let mut finished = Vec::new();
    let mut steps = 0u64;
    let mut round = 0usize;
    while running.len() > 1 {
        round += 1;
        let mut i = 0;
        while i < running.len() && running.len() > 1 {
            steps += 1;
            if sizes[running[i]] == round {
                finished.push(running.remove(i));
            } else {
                i += 1;
            }
        }
    }
    Lockstep {
        finished,
        survivor: running[0],
        steps,
    }
}

/// Runs the good-component search on one SCC at a time, sharing a single
/// SCC engine and set arena across calls.
pub struct GoodCompRunner {
    engine: DecSccEngine,
    sets: StreettSets,
    k_entries: Vec<u32>,
    stats: GoodCompStats,
}

impl GoodCompRunner {
    pub fn new(model: &MdpModel, spec: &StreettSpec, seed: u64) -> Self {
        let n = model.vertex_count();
        GoodCompRunner {
            engine: DecSccEngine::with_seed(model, seed),
            sets: StreettSets::new(n, spec),
            k_entries: vec![0; n],
            stats: GoodCompStats::default(),
        }
    }

    pub fn engine(&self) -> &DecSccEngine {
        &self.engine
    }

    pub fn stats(&self) -> GoodCompStats {
        GoodCompStats {
            ds_cost: self.sets.cost(),
            ..self.stats.clone()
        }
    }

    /// Searches `component`, a union of SCCs of the current graph, for a good
    /// component.
    pub fn run(
        &mut self,
        component: &[Vertex],
        mut observer: Option<Observer<'_>>,
    ) -> Option<GoodComponent> {
        let Ok(start) = self.sets.construct(component) else {
            panic!("component overlaps a set from an earlier run");
        };
        let mut reps: Vec<SccHandle> = component.iter().map(|&v| self.engine.rep(v)).collect();
        reps.sort_unstable();
        reps.dedup();
        let mut edges = 0;
        for &h in &reps {
            self.sets.sccs_mut(start).insert(h, self.engine.min_member(h));
            edges += self.engine.internal_edges(h);
        }
        // Edges between different SCCs of the component.
        for &v in component {
            edges += self
                .engine
                .successors(v)
                .filter(|&w| self.sets.contains(start, w) && !self.engine.query(v, w))
                .count();
        }
        self.sets.set_edge_count(start, edges);

        let mut queue: VecDeque<SetId> = VecDeque::from([start]);
        let mut found = None;
        while let Some(s) = queue.pop_front() {
            self.stats.iterations += 1;
            found = self.iterate(s, &mut queue);
            if let Some(obs) = observer.as_mut() {
                obs(&self.snapshot(&queue));
            }
            if found.is_some() {
                break;
            }
        }
        for id in queue {
            self.sets.dispose(id);
        }
        found
    }

    fn snapshot(&self, queue: &VecDeque<SetId>) -> LoopSnapshot {
        LoopSnapshot {
            sets: queue
                .iter()
                .map(|&id| {
                    let sccs = self
                        .sets
                        .sccs(id)
                        .iter()
                        .map(|h| self.engine.member_set(h))
                        .collect();
                    (self.sets.member_set(id), sccs)
                })
                .collect(),
        }
    }

    /// One outer-loop iteration on the dequeued set `s`.
    fn iterate(&mut self, s: SetId, queue: &mut VecDeque<SetId>) -> Option<GoodComponent> {
        while !self.sets.bad(s).is_empty() {
            self.remove_bad(s);
        }
        if self.sets.edge_count(s) == 0 {
            self.sets.dispose(s);
            return None;
        }

        let handles: Vec<SccHandle> = self.sets.sccs(s).iter().collect();
        let total = self.sets.len(s);
        if handles.len() == 1 {
            debug_assert_eq!(self.engine.size(handles[0]), total);
            let members = self.sets.member_set(s);
            self.sets.dispose(s);
            return Some(GoodComponent { members });
        }

        let sizes: Vec<usize> = handles.iter().map(|&h| self.engine.size(h)).collect();
        let race = lockstep(&sizes);
        self.stats.lockstep_steps += race.steps;
        let mut k: Vec<SccHandle> = race.finished.iter().map(|&i| handles[i]).collect();
        let survivor = handles[race.survivor];
        let survivor_size = total - race.finished.iter().map(|&i| sizes[i]).sum::<usize>();
        let keep_survivor = 2 * survivor_size > total;
        if !keep_survivor {
            k.push(survivor);
        }
        k.sort_unstable_by_key(|&h| self.engine.min_member(h));

        let mut removed: Vec<Vertex> = Vec::new();
        for &h in &k {
            removed.extend_from_slice(self.engine.members(h));
            self.sets.sccs_mut(s).erase(h).expect("K holds handles of SCCs(S)");
        }
        if keep_survivor {
            self.sets.remove(s, &removed).expect("K components lie in S");
            let edges = self.engine.internal_edges(survivor);
            self.sets.set_edge_count(s, edges);
        } else {
            self.sets.dispose(s);
        }
        for &h in &k {
            let members = self.engine.members(h).to_vec();
            for &v in &members {
                self.k_entries[v] += 1;
                self.stats.max_k_entries = self.stats.max_k_entries.max(self.k_entries[v]);
            }
            let x = self.sets.construct(&members).expect("K components are untracked");
            self.sets.sccs_mut(x).insert(h, self.engine.min_member(h));
            self.sets.set_edge_count(x, self.engine.internal_edges(h));
            queue.push_back(x);
        }
        if keep_survivor {
            queue.push_back(s);
        }
        None
    }

    /// Removes the current bad vertices of `s` and deletes all their edges.
    fn remove_bad(&mut self, s: SetId) {
        let mut bad = self.sets.bad(s).to_vec();
        bad.sort_unstable();
        let mut batch: Vec<Edge> = bad
            .iter()
            .flat_map(|&b| self.engine.incident_edges(b))
            .collect();
        batch.sort_unstable();
        batch.dedup();
        let inside = batch
            .iter()
            .filter(|&&(u, v)| self.sets.contains(s, u) && self.sets.contains(s, v))
            .count();
        let edges = self.sets.edge_count(s) - inside;
        self.sets.set_edge_count(s, edges);

        for &b in &bad {
            let h = self.engine.rep(b);
            if self.sets.sccs(s).contains(h) {
                self.sets.sccs_mut(s).erase(h).expect("checked above");
            }
        }
        self.sets.remove(s, &bad).expect("bad vertices are members");
        let pieces = self
            .engine
            .delete_announce(&batch)
            .expect("incident edges are live");
        for h in pieces {
            let min = self.engine.min_member(h);
            if self.sets.contains(s, min) {
                self.sets.sccs_mut(s).insert(h, min);
            }
        }
    }

    pub fn into_trace(self) -> Vec<Edge> {
        self.engine.trace().to_vec()
    }
}

/// Searches one SCC of `model` for a good component.
pub fn good_component(
    scc: &VertexSet,
    model: &MdpModel,
    spec: &StreettSpec,
) -> Option<GoodComponent> {
    GoodCompRunner::new(model, spec, 0).run(scc.as_slice(), None)
}

/// Full output of the graph Streett solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStreettReport {
    pub winning: VertexSet,
    /// SCCs of the input that contain a good component.
    pub satisfying: Vec<VertexSet>,
    /// The good component found in each satisfying SCC.
    pub witnesses: Vec<VertexSet>,
    /// Edges deleted from the SCC engine, in order.
    pub trace: Vec<Edge>,
    pub stats: GoodCompStats,
    /// Per vertex: times it landed in a small piece of an engine split.
    pub small_charges: Vec<u32>,
}

fn check_graph(model: &MdpModel, spec: &StreettSpec) -> Result<(), StreettError> {
    if let Some(v) = (0..model.vertex_count()).find(|&v| model.is_random(v)) {
        return Err(StreettError::RandomVertex(v));
    }
    spec.validate(model.vertex_count())?;
    Ok(())
}

pub fn solve_graph(
    model: &MdpModel,
    spec: &StreettSpec,
    seed: u64,
) -> Result<GraphStreettReport, StreettError> {
    solve_graph_observed(model, spec, seed, None)
}

/// Like [`solve_graph`]; `observer` sees the queue after every outer-loop
/// iteration of every good-component search.
pub fn solve_graph_observed(
    model: &MdpModel,
    spec: &StreettSpec,
    seed: u64,
    mut observer: Option<Observer<'_>>,
) -> Result<GraphStreettReport, StreettError> {
    check_graph(model, spec)?;
    let mut runner = GoodCompRunner::new(model, spec, seed);
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    for scc in tarjan_sccs(model, None) {
        if runner.engine.internal_edges(runner.engine.rep(scc.as_slice()[0])) == 0 {
            continue;
        }
        let obs = observer.as_mut().map(|o| &mut **o as &mut dyn FnMut(&LoopSnapshot));
        if let Some(good) = runner.run(scc.as_slice(), obs) {
            witnesses.push(good.members);
            satisfying.push(scc);
        }
    }
    let targets: VertexSet = satisfying.iter().flat_map(|s| s.iter()).collect();
    let stats = runner.stats();
    let small_charges = runner.engine.small_charges().to_vec();
    Ok(GraphStreettReport {
        winning: graph_reach(model, &targets),
        satisfying,
        witnesses,
        trace: runner.into_trace(),
        stats,
        small_charges,
    })
}

/// Winning set of the Streett objective on a graph.
pub fn winning_set_graph(model: &MdpModel, spec: &StreettSpec) -> Result<VertexSet, StreettError> {
    Ok(solve_graph(model, spec, 0)?.winning)
}

/// Edges the graph solver deletes, in order.
pub fn deletion_trace(
    model: &MdpModel,
    spec: &StreettSpec,
    seed: u64,
) -> Result<Vec<Edge>, StreettError> {
    Ok(solve_graph(model, spec, seed)?.trace)
}
