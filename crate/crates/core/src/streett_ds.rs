//! Per-set Streett bookkeeping: for each tracked vertex set S, which pairs
//! are requested/granted inside S, which vertices are bad, the SCCs of
//! `G[S]` and the number of edges inside S.
//!
//! Tracked sets are always pairwise disjoint, so membership and positions
//! are stored in vertex-indexed arrays shared by all sets. Counters are kept
//! sparsely per set so that building or shrinking a set costs
//! `O(|arg| + bits(arg))`.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::dec_scc::SccHandle;
use crate::model::{StreettSpec, Vertex, VertexSet};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StreettDsError {
    #[error("vertex {0} is not in the set")]
    NotMember(Vertex),
    #[error("vertex {0} already belongs to a tracked set")]
    AlreadyTracked(Vertex),
    #[error("handle {0:?} is not in the collection")]
    UnknownHandle(SccHandle),
}

/// For every vertex, the pairs it requests or grants.
#[derive(Clone, Debug)]
pub struct PairIndex {
    start: Vec<usize>,
    /// `(pair, is_grant)`
    entries: Vec<(u32, bool)>,
}

impl PairIndex {
    pub fn new(n: usize, spec: &StreettSpec) -> Self {
        let mut lists: Vec<Vec<(u32, bool)>> = vec![Vec::new(); n];
        for (j, p) in spec.pairs().iter().enumerate() {
            for v in &p.requests {
                lists[v].push((j as u32, false));
            }
            for v in &p.grants {
                lists[v].push((j as u32, true));
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        let mut entries = Vec::with_capacity(spec.size());
        for l in lists {
            entries.extend(l);
            start.push(entries.len());
        }
        PairIndex { start, entries }
    }

    pub fn memberships(&self, v: Vertex) -> &[(u32, bool)] {
        &self.entries[self.start[v]..self.start[v + 1]]
    }
}

/// A pair is violated inside S when S requests it but grants nothing.
#[inline]
fn grants_missing(grant_count: u32) -> bool {
    #[cfg(feature = "mutant-negate-bad")]
    {
        grant_count != 0
    }
    #[cfg(not(feature = "mutant-negate-bad"))]
    {
        grant_count == 0
    }
}

/// SCC handles ordered by smallest member.
#[derive(Clone, Debug, Default)]
pub struct SccCollection {
    ordered: BTreeSet<(Vertex, SccHandle)>,
    key: HashMap<SccHandle, Vertex>,
}

impl SccCollection {
    /// Inserts `h` keyed by `min`, re-keying it if already present.
    pub fn insert(&mut self, h: SccHandle, min: Vertex) {
        if let Some(old) = self.key.insert(h, min) {
            self.ordered.remove(&(old, h));
        }
        self.ordered.insert((min, h));
    }

    pub fn erase(&mut self, h: SccHandle) -> Result<(), StreettDsError> {
        let min = self.key.remove(&h).ok_or(StreettDsError::UnknownHandle(h))?;
        self.ordered.remove(&(min, h));
        Ok(())
    }

    pub fn contains(&self, h: SccHandle) -> bool {
        self.key.contains_key(&h)
    }

    pub fn iter(&self) -> impl Iterator<Item = SccHandle> + '_ {
        self.ordered.iter().map(|&(_, h)| h)
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    pub fn clear(&mut self) {
        self.ordered.clear();
        self.key.clear();
    }
}

/// Identifier of a tracked set. Ids are never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetId(u32);

#[derive(Debug, Default)]
struct SetData {
    members: Vec<Vertex>,
    requests: HashMap<u32, u32>,
    grants: HashMap<u32, u32>,
    /// Requesters of each pair, possibly including vertices removed since.
    requesters: HashMap<u32, Vec<Vertex>>,
    bad: Vec<Vertex>,
    bits: usize,
    edges: usize,
    sccs: SccCollection,
}

/// Arena of disjoint tracked sets.
pub struct StreettSets {
    index: PairIndex,
    set_of: Vec<u32>,
    pos: Vec<u32>,
    bad_pos: Vec<u32>,
    sets: Vec<SetData>,
    cost: u64,
}

impl StreettSets {
    pub fn new(n: usize, spec: &StreettSpec) -> Self {
        StreettSets {
            index: PairIndex::new(n, spec),
            set_of: vec![NONE; n],
            pos: vec![0; n],
            bad_pos: vec![NONE; n],
            sets: Vec::new(),
            cost: 0,
        }
    }

    /// Starts tracking `members`, none of which may be tracked already.
    pub fn construct(&mut self, members: &[Vertex]) -> Result<SetId, StreettDsError> {
        if let Some(&v) = members.iter().find(|&&v| self.set_of[v] != NONE) {
            return Err(StreettDsError::AlreadyTracked(v));
        }
        let id = self.sets.len() as u32;
        let mut data = SetData {
            members: members.to_vec(),
            ..SetData::default()
        };
        for (i, &v) in members.iter().enumerate() {
            if self.set_of[v] != NONE {
                // Repeated vertex in the argument.
                for &w in &members[..i] {
                    self.set_of[w] = NONE;
                }
                return Err(StreettDsError::AlreadyTracked(v));
            }
            self.set_of[v] = id;
            self.pos[v] = i as u32;
            for &(j, is_grant) in self.index.memberships(v) {
                if is_grant {
                    *data.grants.entry(j).or_insert(0) += 1;
                } else {
                    *data.requests.entry(j).or_insert(0) += 1;
                    data.requesters.entry(j).or_default().push(v);
                }
                data.bits += 1;
            }
        }
        self.cost += (members.len() + data.bits) as u64;
        let mut violated: Vec<u32> = data
            .requests
            .keys()
            .copied()
            .filter(|j| grants_missing(data.grants.get(j).copied().unwrap_or(0)))
            .collect();
        violated.sort_unstable();
        self.sets.push(data);
        for j in violated {
            self.flag_requesters(id, j);
        }
        Ok(SetId(id))
    }

    fn flag_requesters(&mut self, id: u32, pair: u32) {
        let data = &mut self.sets[id as usize];
        if let Some(list) = data.requesters.get(&pair) {
            for &v in list {
                if self.set_of[v] == id && self.bad_pos[v] == NONE {
                    self.bad_pos[v] = data.bad.len() as u32;
                    data.bad.push(v);
                }
            }
        }
    }

    /// Removes `b` from the set; vertices that lose their last grant partner
    /// become bad.
    pub fn remove(&mut self, id: SetId, b: &[Vertex]) -> Result<(), StreettDsError> {
        if let Some(&v) = b.iter().find(|&&v| self.set_of[v] != id.0) {
            return Err(StreettDsError::NotMember(v));
        }
        let mut emptied: Vec<u32> = Vec::new();
        let mut bits = 0usize;
        for &v in b {
            if self.set_of[v] != id.0 {
                // Repeated in `b`.
                continue;
            }
            let data = &mut self.sets[id.0 as usize];
            self.set_of[v] = NONE;
            let p = self.pos[v] as usize;
            data.members.swap_remove(p);
            if let Some(&moved) = data.members.get(p) {
                self.pos[moved] = p as u32;
            }
            let bp = self.bad_pos[v];
            if bp != NONE {
                data.bad.swap_remove(bp as usize);
                if let Some(&moved) = data.bad.get(bp as usize) {
                    self.bad_pos[moved] = bp;
                }
                self.bad_pos[v] = NONE;
            }
            for &(j, is_grant) in self.index.memberships(v) {
                bits += 1;
                let counts = if is_grant {
                    &mut data.grants
                } else {
                    &mut data.requests
                };
                let c = counts.get_mut(&j).expect("counter exists for members");
                *c -= 1;
                if *c == 0 {
                    counts.remove(&j);
                    if is_grant {
                        emptied.push(j);
                    }
                }
            }
            data.bits -= self.index.memberships(v).len();
        }
        self.cost += (b.len() + bits) as u64;
        emptied.sort_unstable();
        emptied.dedup();
        for j in emptied {
            let data = &self.sets[id.0 as usize];
            if data.requests.contains_key(&j) && grants_missing(0) {
                self.flag_requesters(id.0, j);
            }
        }
        Ok(())
    }

    /// Bad vertices of the set, in the order they were flagged.
    pub fn bad(&self, id: SetId) -> &[Vertex] {
        &self.sets[id.0 as usize].bad
    }

    /// Members in no particular order.
    pub fn members(&self, id: SetId) -> &[Vertex] {
        &self.sets[id.0 as usize].members
    }

    pub fn member_set(&self, id: SetId) -> VertexSet {
        VertexSet::from_vec(self.members(id).to_vec())
    }

    pub fn len(&self, id: SetId) -> usize {
        self.sets[id.0 as usize].members.len()
    }

    pub fn contains(&self, id: SetId, v: Vertex) -> bool {
        self.set_of[v] == id.0
    }

    pub fn set_of(&self, v: Vertex) -> Option<SetId> {
        (self.set_of[v] != NONE).then_some(SetId(self.set_of[v]))
    }

    /// `Σ_j |S∩L_j| + |S∩U_j|`.
    pub fn bits(&self, id: SetId) -> usize {
        self.sets[id.0 as usize].bits
    }

    /// Number of edges inside the set, as maintained by the caller.
    pub fn edge_count(&self, id: SetId) -> usize {
        self.sets[id.0 as usize].edges
    }

    pub fn set_edge_count(&mut self, id: SetId, edges: usize) {
        self.sets[id.0 as usize].edges = edges;
    }

    pub fn sccs(&self, id: SetId) -> &SccCollection {
        &self.sets[id.0 as usize].sccs
    }

    pub fn sccs_mut(&mut self, id: SetId) -> &mut SccCollection {
        &mut self.sets[id.0 as usize].sccs
    }

    /// Stops tracking the set and frees its storage.
    pub fn dispose(&mut self, id: SetId) {
        let data = std::mem::take(&mut self.sets[id.0 as usize]);
        for v in data.members {
            self.set_of[v] = NONE;
        }
        for v in data.bad {
            self.bad_pos[v] = NONE;
        }
    }

    /// Total of `|arg| + bits(arg)` over all construct and remove calls.
    pub fn cost(&self) -> u64 {
        self.cost
    }
}
