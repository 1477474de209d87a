//! Streett winning sets on MDPs.
//!
//! Every vertex `v` is split into `v_in -> v_out` so that removing a bad
//! vertex becomes deleting the player-1 edge `(v_in, v_out)`. The search for
//! good end-components then mirrors the graph version, with [`DecMec`]
//! standing in for the SCC engine: each tracked set is a union of MECs of
//! the split MDP, and the MECs announced after a deletion replace the ones
//! it broke. Winning vertices are those that almost surely reach a MEC
//! containing a good end-component.

use std::collections::{HashMap, VecDeque};

use crate::dec_mec::DecMec;
use crate::dec_scc::SccHandle;
use crate::graph::{split_in, split_origin, split_out, split_vertices};
use crate::graph_streett::{lockstep, GoodCompStats, LoopSnapshot, Observer, StreettError};
use crate::mec::{asw_reach, mec_decomposition_with, MecOptions};
use crate::model::{Edge, MdpModel, Owner, StreettPair, StreettSpec, Vertex, VertexSet};
use crate::oracles::{enumerate_good_end_components, oracle_good_end_component, oracle_mec, OracleError};
use crate::streett_ds::{PairIndex, SetId, StreettSets};

/// A good end-component found in the split MDP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodEndComponent {
    /// Members in split coordinates.
    pub split_members: VertexSet,
    /// Original vertices `v` with `v_in` and `v_out` both in the component.
    pub members: VertexSet,
}

impl GoodEndComponent {
    fn from_split(split_members: VertexSet) -> Self {
        let members = split_members
            .iter()
            .filter(|&x| x % 2 == 0 && split_members.contains(x + 1))
            .map(split_origin)
            .collect();
        GoodEndComponent {
            split_members,
            members,
        }
    }
}

/// Good end-component search over the MECs of a split MDP, sharing one
/// [`DecMec`] and set arena across calls.
pub struct GoodEndRunner {
    mecs: DecMec,
    sets: StreettSets,
    k_entries: Vec<u32>,
    stats: GoodCompStats,
}

impl GoodEndRunner {
    /// `model` and `spec` must be a split instance: requests on `v_in`,
    /// grants on `v_out`.
    pub fn new(model: &MdpModel, spec: &StreettSpec, seed: u64) -> Self {
        let n = model.vertex_count();
        GoodEndRunner {
            mecs: DecMec::with_seed(model, seed),
            sets: StreettSets::new(n, spec),
            k_entries: vec![0; n],
            stats: GoodCompStats::default(),
        }
    }

    pub fn dec_mec(&self) -> &DecMec {
        &self.mecs
    }

    pub fn stats(&self) -> GoodCompStats {
        GoodCompStats {
            ds_cost: self.sets.cost(),
            ..self.stats.clone()
        }
    }

    pub fn into_trace(self) -> Vec<Edge> {
        self.mecs.deletion_trace().to_vec()
    }

    /// Searches `mec`, a current non-trivial MEC, for a good end-component.
    pub fn run(&mut self, mec: &VertexSet, mut observer: Option<Observer<'_>>) -> Option<GoodEndComponent> {
        let min = mec.smallest()?;
        let h = self.mecs.mec_of(min)?;
        debug_assert_eq!(self.mecs.members(h), *mec);
        let Ok(start) = self.sets.construct(mec.as_slice()) else {
            panic!("MEC overlaps a set from an earlier run");
        };
        self.sets.sccs_mut(start).insert(h, min);

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
        found.map(GoodEndComponent::from_split)
    }

    fn snapshot(&self, queue: &VecDeque<SetId>) -> LoopSnapshot {
        LoopSnapshot {
            sets: queue
                .iter()
                .map(|&id| {
                    let mecs = self
                        .sets
                        .sccs(id)
                        .iter()
                        .map(|h| self.mecs.members(h))
                        .collect();
                    (self.sets.member_set(id), mecs)
                })
                .collect(),
        }
    }

    fn size(&self, h: SccHandle) -> usize {
        self.mecs.engine().size(h)
    }

    fn iterate(&mut self, s: SetId, queue: &mut VecDeque<SetId>) -> Option<VertexSet> {
        while !self.sets.bad(s).is_empty() {
            self.remove_bad(s);
        }
        if self.sets.sccs(s).is_empty() {
            debug_assert_eq!(self.sets.len(s), 0);
            self.sets.dispose(s);
            return None;
        }

        let handles: Vec<SccHandle> = self.sets.sccs(s).iter().collect();
        let total = self.sets.len(s);
        debug_assert_eq!(handles.iter().map(|&h| self.size(h)).sum::<usize>(), total);
        if handles.len() == 1 {
            let members = self.sets.member_set(s);
            self.sets.dispose(s);
            return Some(members);
        }

        let sizes: Vec<usize> = handles.iter().map(|&h| self.size(h)).collect();
        let race = lockstep(&sizes);
        self.stats.lockstep_steps += race.steps;
        let mut k: Vec<SccHandle> = race.finished.iter().map(|&i| handles[i]).collect();
        let survivor = handles[race.survivor];
        let keep_survivor = 2 * sizes[race.survivor] > total;
        if !keep_survivor {
            k.push(survivor);
        }
        let engine = self.mecs.engine();
        k.sort_unstable_by_key(|&h| engine.min_member(h));

        let mut removed: Vec<Vertex> = Vec::new();
        for &h in &k {
            removed.extend_from_slice(engine.members(h));
            self.sets.sccs_mut(s).erase(h).expect("K holds MECs of S");
        }
        if keep_survivor {
            self.sets.remove(s, &removed).expect("K MECs lie in S");
        } else {
            self.sets.dispose(s);
        }
        for &h in &k {
            let members = self.mecs.engine().members(h).to_vec();
            for &v in &members {
                self.k_entries[v] += 1;
                self.stats.max_k_entries = self.stats.max_k_entries.max(self.k_entries[v]);
            }
            let x = self.sets.construct(&members).expect("K MECs are untracked");
            self.sets.sccs_mut(x).insert(h, self.mecs.engine().min_member(h));
            queue.push_back(x);
        }
        if keep_survivor {
            queue.push_back(s);
        }
        None
    }

    /// Cuts the current bad vertices of `s` off their `v_out`, then drops
    /// every vertex of `s` that no longer lies in a non-trivial MEC.
    fn remove_bad(&mut self, s: SetId) {
        let mut bad = self.sets.bad(s).to_vec();
        bad.sort_unstable();
        let mut broken: Vec<SccHandle> = Vec::new();
        for &b in &bad {
            debug_assert_eq!(b % 2, 0, "only v_in vertices carry requests");
            let h = self.mecs.engine().rep(b);
            if self.sets.sccs(s).contains(h) {
                self.sets.sccs_mut(s).erase(h).expect("checked above");
                broken.push(h);
            }
        }
        self.sets.remove(s, &bad).expect("bad vertices are members");
        let batch: Vec<Edge> = bad.iter().map(|&b| (b, b + 1)).collect();
        let mut fresh = self
            .mecs
            .delete_player_edges(&batch)
            .expect("(v_in, v_out) edges of MEC vertices are live");
        // A MEC that only lost an edge keeps its handle without an
        // announcement.
        fresh.extend(broken.into_iter().filter(|&h| !self.mecs.engine().is_trivial(h)));
        for h in fresh {
            let min = self.mecs.engine().min_member(h);
            if self.sets.contains(s, min) {
                self.sets.sccs_mut(s).insert(h, min);
            }
        }
        let mut loose = self.mecs.take_released();
        loose.retain(|&v| self.sets.contains(s, v));
        loose.sort_unstable();
        loose.dedup();
        if !loose.is_empty() {
            self.sets.remove(s, &loose).expect("filtered to members");
        }
    }
}

/// Searches one MEC of a split instance for a good end-component.
pub fn good_end_component(
    split_model: &MdpModel,
    split_spec: &StreettSpec,
    mec: &VertexSet,
) -> Option<GoodEndComponent> {
    GoodEndRunner::new(split_model, split_spec, 0).run(mec, None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpStreettReport {
    pub winning: VertexSet,
    /// MECs of the input that contain a good end-component.
    pub satisfying: Vec<VertexSet>,
    /// The good end-component found in each satisfying MEC.
    pub witnesses: Vec<VertexSet>,
    /// Edges removed from the pure graphs of the per-MEC split instances,
    /// in split coordinates of the whole model and in order.
    pub trace: Vec<Edge>,
    pub stats: GoodCompStats,
    /// Small-piece charges of every split vertex, taken from the engine of
    /// its MEC. Vertices outside MECs stay at zero.
    pub small_charges: Vec<u32>,
}

pub fn solve_mdp(model: &MdpModel, spec: &StreettSpec, seed: u64) -> Result<MdpStreettReport, StreettError> {
    solve_mdp_observed(model, spec, seed, None)
}

/// The split image of one MEC `mec` of `model`, relabelled so that the
/// `i`-th member `v` becomes `2i` (`v_in`) and `2i + 1` (`v_out`). Pairs the
/// MEC does not touch are left out.
fn local_split(model: &MdpModel, index: &PairIndex, mec: &VertexSet) -> (MdpModel, StreettSpec) {
    let members = mec.as_slice();
    let local = |v: Vertex| members.binary_search(&v).ok();
    let mut owners = Vec::with_capacity(2 * members.len());
    let mut edges: Vec<Edge> = Vec::new();
    let mut pair_ids: HashMap<u32, usize> = HashMap::new();
    let mut pairs: Vec<(Vec<Vertex>, Vec<Vertex>)> = Vec::new();
    for (i, &v) in members.iter().enumerate() {
        owners.push(Owner::Player1);
        owners.push(model.owner(v));
        edges.push((split_in(i), split_out(i)));
        edges.extend(model.successors(v).filter_map(local).map(|w| (split_out(i), split_in(w))));
        for &(j, is_grant) in index.memberships(v) {
            let slot = *pair_ids.entry(j).or_insert_with(|| {
                pairs.push((Vec::new(), Vec::new()));
                pairs.len() - 1
            });
            if is_grant {
                pairs[slot].1.push(split_out(i));
            } else {
                pairs[slot].0.push(split_in(i));
            }
        }
    }
    let spec = StreettSpec::new(
        pairs
            .into_iter()
            .map(|(l, u)| StreettPair::new(l, u))
            .collect(),
    );
    (
        MdpModel::derived(owners, edges).expect("split image of a MEC"),
        spec,
    )
}

/// Like [`solve_mdp`]; `observer` sees the queue, in split coordinates of
/// the whole model, after every outer-loop iteration.
pub fn solve_mdp_observed(
    model: &MdpModel,
    spec: &StreettSpec,
    seed: u64,
    mut observer: Option<Observer<'_>>,
) -> Result<MdpStreettReport, StreettError> {
    let n = model.vertex_count();
    spec.validate(n)?;
    let index = PairIndex::new(n, spec);
    let options = MecOptions {
        include_trivial: false,
        seed,
    };
    let mut satisfying = Vec::new();
    let mut witnesses = Vec::new();
    let mut trace = Vec::new();
    let mut stats = GoodCompStats::default();
    let mut small_charges = vec![0; 2 * n];
    for mec in mec_decomposition_with(model, options).decomposition.mecs {
        let (local_model, local_spec) = local_split(model, &index, &mec);
        let members = mec.as_slice();
        let global = |x: Vertex| 2 * members[split_origin(x)] + x % 2;
        let mut runner = GoodEndRunner::new(&local_model, &local_spec, seed);
        let whole: VertexSet = (0..local_model.vertex_count()).collect();
        let mut translate = |snap: &LoopSnapshot| {
            if let Some(obs) = observer.as_mut() {
                let map = |set: &VertexSet| set.iter().map(global).collect::<VertexSet>();
                obs(&LoopSnapshot {
                    sets: snap
                        .sets
                        .iter()
                        .map(|(s, mecs)| (map(s), mecs.iter().map(map).collect()))
                        .collect(),
                });
            }
        };
        let good = runner.run(&whole, Some(&mut translate));
        let run_stats = runner.stats();
        stats.iterations += run_stats.iterations;
        stats.lockstep_steps += run_stats.lockstep_steps;
        stats.ds_cost += run_stats.ds_cost;
        stats.max_k_entries = stats.max_k_entries.max(run_stats.max_k_entries);
        for (x, &c) in runner.dec_mec().engine().small_charges().iter().enumerate() {
            small_charges[global(x)] = c;
        }
        trace.extend(
            runner
                .into_trace()
                .into_iter()
                .map(|(u, v)| (global(u), global(v))),
        );
        if let Some(good) = good {
            witnesses.push(good.members.iter().map(|i| members[i]).collect());
            satisfying.push(mec);
        }
    }
    let targets: VertexSet = satisfying.iter().flat_map(|m: &VertexSet| m.iter()).collect();
    Ok(MdpStreettReport {
        winning: asw_reach(model, &targets),
        satisfying,
        witnesses,
        trace,
        stats,
        small_charges,
    })
}

/// Winning set of the Streett objective on an MDP.
pub fn winning_set_mdp(model: &MdpModel, spec: &StreettSpec) -> Result<VertexSet, StreettError> {
    Ok(solve_mdp(model, spec, 0)?.winning)
}

/// Whether `model` has a good end-component exactly when its split instance
/// has one, checked by enumeration on the original and by recomputation on
/// the split.
pub fn equivalence_check_split(model: &MdpModel, spec: &StreettSpec) -> Result<bool, OracleError> {
    let original = !enumerate_good_end_components(model, spec)?.is_empty();
    let split = split_vertices(model, spec);
    let in_split = oracle_mec(&split.model)
        .mecs
        .iter()
        .any(|m| oracle_good_end_component(&split.model, &split.spec, m).is_some());
    Ok(original == in_split)
}

/// Whether `v_in` and `v_out` are both in or both out of `set`, for every `v`.
pub fn split_coherent(set: &VertexSet) -> bool {
    set.iter()
        .all(|x| set.contains(split_in(split_origin(x))) && set.contains(split_out(split_origin(x))))
}
