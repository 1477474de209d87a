//! Static MEC decomposition and almost-sure reachability.
//!
//! The decomposition repeatedly takes the bottom SCCs of the current graph,
//! which are end-components, and deletes the edges of their random
//! attractor. The decremental SCC engine reports which SCCs become bottom
//! after each batch, so every edge is deleted at most once.

use crate::dec_scc::DecSccEngine;
use crate::graph::{attractor_within, reach_within, AttractorScratch};
use crate::model::{Edge, MdpModel, Owner, Vertex, VertexSet};

/// MECs sorted by smallest member, plus the vertices in no MEC.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MecDecomposition {
    pub mecs: Vec<VertexSet>,
    pub residue: VertexSet,
}

impl MecDecomposition {
    /// `mec_of[v]` is the index of the MEC containing `v`.
    pub fn mec_index(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, m) in self.mecs.iter().enumerate() {
            for v in m {
                out[v] = Some(i);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MecOptions {
    /// Also report every player-1 vertex outside the non-trivial MECs as a
    /// singleton MEC.
    pub include_trivial: bool,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MecReport {
    pub decomposition: MecDecomposition,
    /// Rounds of bottom-SCC removal.
    pub rounds: usize,
    /// Edges deleted from the SCC engine, in order.
    pub trace: Vec<Edge>,
    pub small_charges: Vec<u32>,
}

/// Non-trivial MECs of the model.
pub fn mec_decomposition(model: &MdpModel) -> MecDecomposition {
    mec_decomposition_with(model, MecOptions::default()).decomposition
}

pub fn mec_decomposition_with(model: &MdpModel, options: MecOptions) -> MecReport {
    let n = model.vertex_count();
    let mut engine = DecSccEngine::with_seed(model, options.seed);
    let mut scratch = AttractorScratch::new(n);
    let mut removed = vec![false; n];
    let mut mecs: Vec<VertexSet> = Vec::new();
    let mut queue: Vec<_> = engine
        .components()
        .into_iter()
        .filter(|&h| engine.is_bottom(h))
        .collect();
    let mut rounds = 0;
    while !queue.is_empty() {
        rounds += 1;
        let mut targets: Vec<Vertex> = Vec::new();
        for &h in &queue {
            if !engine.is_trivial(h) {
                mecs.push(engine.member_set(h));
            }
            targets.extend_from_slice(engine.members(h));
        }
        let attr = scratch.attract(
            &targets,
            |v| model.owner(v),
            |v| engine.out_degree(v),
            |v, f| {
                for u in engine.predecessors(v) {
                    f(u);
                }
            },
        );
        // Sorting the attractor makes the batch order, and so the trace,
        // independent of the order of members inside components.
        let mut attr = attr;
        attr.sort_unstable();
        for &v in &attr {
            removed[v] = true;
        }
        let mut batch: Vec<usize> = Vec::new();
        for &v in &attr {
            // An edge between two attractor vertices is taken as an
            // out-edge of its source only.
            batch.extend(engine.out_edge_ids(v));
            batch.extend(engine.in_edge_ids(v).filter(|&id| !removed[engine.edge_at(id).0]));
        }
        queue = engine.delete_ids_no_outgoing(batch);
        // Vertices of the attractor are isolated now and reappear as trivial
        // bottom SCCs; they are done.
        queue.retain(|&h| !removed[engine.min_member(h)]);
    }
    mecs.sort();
    let mut covered = vec![false; n];
    for m in &mecs {
        for v in m {
            covered[v] = true;
        }
    }
    if options.include_trivial {
        for v in 0..n {
            if !covered[v] && !model.is_random(v) {
                covered[v] = true;
                mecs.push(VertexSet::from([v]));
            }
        }
        mecs.sort();
    }
    let residue = (0..n).filter(|&v| !covered[v]).collect();
    MecReport {
        decomposition: MecDecomposition { mecs, residue },
        rounds,
        trace: engine.trace().to_vec(),
        small_charges: engine.small_charges().to_vec(),
    }
}

/// Copy of the model in which every target only has a self-loop.
pub fn make_absorbing(model: &MdpModel, targets: &VertexSet) -> MdpModel {
    let mut edges: Vec<Edge> = model
        .edges()
        .iter()
        .copied()
        .filter(|&(u, _)| !targets.contains(u))
        .collect();
    edges.extend(targets.iter().map(|t| (t, t)));
    MdpModel::derived(model.owners().to_vec(), edges).expect("valid edge set")
}

/// Model with every MEC that avoids the targets collapsed into one player-1
/// node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    pub model: MdpModel,
    /// Node of each original vertex.
    pub node_of: Vec<usize>,
    /// Original vertices of each node; nodes are numbered by smallest member.
    pub nodes: Vec<VertexSet>,
}

pub fn mec_quotient(
    model: &MdpModel,
    decomposition: &MecDecomposition,
    targets: &VertexSet,
) -> Quotient {
    let n = model.vertex_count();
    let mut nodes: Vec<VertexSet> = Vec::new();
    let mut in_collapsed = vec![false; n];
    for m in &decomposition.mecs {
        if !m.intersects(targets) {
            for v in m {
                in_collapsed[v] = true;
            }
            nodes.push(m.clone());
        }
    }
    nodes.extend((0..n).filter(|&v| !in_collapsed[v]).map(|v| VertexSet::from([v])));
    nodes.sort();
    let mut node_of = vec![0; n];
    let mut owners = Vec::with_capacity(nodes.len());
    for (i, node) in nodes.iter().enumerate() {
        for v in node {
            node_of[v] = i;
        }
        let first = node.as_slice()[0];
        owners.push(if in_collapsed[first] {
            Owner::Player1
        } else {
            model.owner(first)
        });
    }
    let mut edges: Vec<Edge> = model
        .edges()
        .iter()
        .filter(|&&(u, v)| !(in_collapsed[u] && node_of[u] == node_of[v]))
        .map(|&(u, v)| (node_of[u], node_of[v]))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    Quotient {
        model: MdpModel::derived(owners, edges).expect("quotient edges are in range"),
        node_of,
        nodes,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AswReport {
    pub winning: VertexSet,
    /// Passes of the safety fixpoint on the quotient, the last one included.
    pub iterations: usize,
    pub quotient_size: usize,
}

/// Vertices from which player 1 reaches `targets` with probability 1.
pub fn asw_reach(model: &MdpModel, targets: &VertexSet) -> VertexSet {
    asw_reach_report(model, targets, 0).winning
}

pub fn asw_reach_report(model: &MdpModel, targets: &VertexSet, seed: u64) -> AswReport {
    let absorbing = make_absorbing(model, targets);
    let decomposition = mec_decomposition_with(
        &absorbing,
        MecOptions {
            include_trivial: false,
            seed,
        },
    )
    .decomposition;
    let q = mec_quotient(&absorbing, &decomposition, targets);
    let qn = q.model.vertex_count();
    let mut q_targets: Vec<Vertex> = targets.iter().map(|t| q.node_of[t]).collect();
    q_targets.sort_unstable();
    q_targets.dedup();
    let mut working = vec![true; qn];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let reach = reach_within(&q.model, &working, &q_targets);
        let losing: Vec<Vertex> = (0..qn).filter(|&x| working[x] && !reach[x]).collect();
        if losing.is_empty() {
            break;
        }
        for x in attractor_within(&q.model, &working, &losing) {
            working[x] = false;
        }
    }
    let winning = (0..model.vertex_count())
        .filter(|&v| working[q.node_of[v]])
        .collect();
    AswReport {
        winning,
        iterations,
        quotient_size: qn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tarjan_sccs;
    use crate::oracles::{enumerate_end_components, oracle_asw_reach, oracle_mec};
    use proptest::prelude::*;

    fn m1() -> MdpModel {
        MdpModel::new(
            vec![Owner::Random, Owner::Player1, Owner::Player1],
            vec![(0, 1), (0, 2), (1, 1), (2, 2)],
        )
        .unwrap()
    }

    fn sets(v: &[&[Vertex]]) -> Vec<VertexSet> {
        v.iter().map(|s| VertexSet::from_vec(s.to_vec())).collect()
    }

    #[test]
    fn decomposition_examples() {
        let r = MdpModel::new(vec![Owner::Random], vec![(0, 0)]).unwrap();
        let d = mec_decomposition(&r);
        assert_eq!(d.mecs, sets(&[&[0]]));
        assert!(d.residue.is_empty());

        let d = mec_decomposition(&m1());
        assert_eq!(d, oracle_mec(&m1()));
        assert_eq!(d.mecs, sets(&[&[1], &[2]]));
        assert_eq!(d.residue, VertexSet::from([0]));

        let g = MdpModel::graph(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(mec_decomposition(&g).mecs, sets(&[&[0, 1, 2]]));
    }

    #[test]
    fn trivial_mecs_on_request() {
        let m = MdpModel::new(vec![Owner::Player1, Owner::Random], vec![(1, 0)]).unwrap();
        let opts = MecOptions {
            include_trivial: true,
            seed: 0,
        };
        let d = mec_decomposition_with(&m, opts).decomposition;
        assert_eq!(d.mecs, sets(&[&[0]]));
        assert_eq!(d.residue, VertexSet::from([1]));
        assert!(mec_decomposition(&m).mecs.is_empty());
    }

    #[test]
    fn bottom_player_sink_releases_its_predecessors() {
        // {0,1} is a cycle whose only exit leads to the sink 2.
        let g = MdpModel::graph(3, vec![(0, 1), (1, 0), (1, 2)]).unwrap();
        let d = mec_decomposition(&g);
        assert_eq!(d.mecs, sets(&[&[0, 1]]));
        assert_eq!(d.residue, VertexSet::from([2]));
    }

    #[test]
    fn asw_examples() {
        let all: VertexSet = (0..3).collect();
        assert_eq!(asw_reach(&m1(), &all), all);
        let chain = MdpModel::graph(2, vec![(0, 1)]).unwrap();
        assert_eq!(asw_reach(&chain, &VertexSet::from([1])), VertexSet::from([0, 1]));
        let owners = |o| vec![o, Owner::Player1, Owner::Player1];
        let r = MdpModel::new(owners(Owner::Random), vec![(0, 1), (0, 2)]).unwrap();
        assert_eq!(asw_reach(&r, &VertexSet::from([1])), VertexSet::from([1]));
        let p = MdpModel::new(owners(Owner::Player1), vec![(0, 1), (0, 2)]).unwrap();
        assert_eq!(asw_reach(&p, &VertexSet::from([1])), VertexSet::from([0, 1]));
    }

    #[test]
    fn quotient_examples() {
        let dag = MdpModel::graph(3, vec![(0, 1), (1, 2)]).unwrap();
        let q = mec_quotient(&dag, &mec_decomposition(&dag), &VertexSet::new());
        assert_eq!(q.model, dag);

        let g = MdpModel::graph(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let q = mec_quotient(&g, &mec_decomposition(&g), &VertexSet::new());
        assert_eq!(q.model.vertex_count(), 1);
        assert_eq!(q.model.edge_count(), 0);

        let q = mec_quotient(&m1(), &mec_decomposition(&m1()), &VertexSet::from([1]));
        assert_eq!(q.model.vertex_count(), 3);
        assert_eq!(q.model.edges(), &[(0, 1), (0, 2), (1, 1)]);
    }

    fn arb_mdp(max_n: usize) -> impl Strategy<Value = MdpModel> {
        (1..=max_n).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec((0..n, 0..n), 0..=3 * n),
            )
                .prop_map(move |(rand, edges)| {
                    let mut edges = edges;
                    edges.sort_unstable();
                    edges.dedup();
                    let owners: Vec<Owner> = (0..n)
                        .map(|v| {
                            if rand[v] && edges.iter().any(|e| e.0 == v) {
                                Owner::Random
                            } else {
                                Owner::Player1
                            }
                        })
                        .collect();
                    MdpModel::new(owners, edges).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn mecs_are_maximal_end_components(m in arb_mdp(10), seed in any::<u64>()) {
            let report = mec_decomposition_with(&m, MecOptions { include_trivial: false, seed });
            let d = report.decomposition;
            prop_assert_eq!(&d, &oracle_mec(&m));
            for mec in &d.mecs {
                prop_assert_eq!(tarjan_sccs(&m, Some(mec)).len(), 1);
                for v in mec {
                    if m.is_random(v) {
                        prop_assert!(m.successors(v).all(|w| mec.contains(w)));
                    }
                }
            }
            let ecs = enumerate_end_components(&m).unwrap();
            for ec in &ecs {
                prop_assert!(!ec.intersects(&d.residue));
                prop_assert!(d.mecs.iter().any(|mec| ec.is_subset(mec)));
            }
            let mut trace = report.trace.clone();
            trace.sort_unstable();
            trace.dedup();
            prop_assert_eq!(trace.len(), report.trace.len());
        }

        #[test]
        fn asw_matches_direct_fixpoint(m in arb_mdp(12), t in proptest::collection::vec(0usize..12, 0..3)) {
            let t: VertexSet = t.into_iter().filter(|&v| v < m.vertex_count()).collect();
            let w = asw_reach(&m, &t);
            prop_assert_eq!(&w, &oracle_asw_reach(&m, &t));
            let reach = crate::graph::graph_reach(&m, &t);
            prop_assert!(w.is_subset(&reach));
        }
    }
}
