mod common;

use common::arb_instance;
use proptest::prelude::*;
use streett_core::dec_mec::{DecMec, WorklistSnapshot};
use streett_core::oracles::oracle_mec;
use streett_core::{Edge, Instance, VertexSet};

/// An instance plus all of its player-1 edges in a random order.
fn arb_sequence(max_n: usize) -> impl Strategy<Value = (Instance, Vec<Edge>)> {
    arb_instance(max_n, 0, true).prop_flat_map(|inst| {
        let player: Vec<Edge> = inst
            .model
            .edges()
            .iter()
            .copied()
            .filter(|&(u, _)| !inst.model.is_random(u))
            .collect();
        (Just(inst), Just(player).prop_shuffle())
    })
}

fn non_trivial(set: &VertexSet, edges: &[Edge]) -> bool {
    set.len() > 1 || edges.binary_search(&(set.as_slice()[0], set.as_slice()[0])).is_ok()
}

fn check_worklist(snap: &WorklistSnapshot, mecs: &[VertexSet]) -> Result<(), TestCaseError> {
    let listed: Vec<&VertexSet> = snap.lists.iter().flatten().collect();
    for scc in &snap.partition {
        if non_trivial(scc, &snap.edges) && !mecs.contains(scc) {
            prop_assert!(listed.contains(&scc), "non-MEC SCC {:?} missing from the worklist", scc);
        }
    }
    for list in &snap.lists {
        let union: VertexSet = list.iter().flat_map(|s| s.iter()).collect();
        for &(u, v) in &snap.edges {
            if union.contains(u) {
                prop_assert!(union.contains(v), "edge ({}, {}) leaves its list", u, v);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_recomputation_after_every_deletion((inst, order) in arb_sequence(40)) {
        let model = &inst.model;
        let n = model.vertex_count();
        let mut dm = DecMec::new(model);
        prop_assert_eq!(dm.decomposition(), oracle_mec(model));
        let mut released = vec![false; n];
        for &(u, v) in &order {
            let before = dm.deletion_trace().len();
            let mut snapshots = Vec::new();
            let mut record = |s: &WorklistSnapshot| snapshots.push(s.clone());
            let fresh = dm.delete_player_edge_observed(u, v, Some(&mut record)).unwrap();
            let current = dm.current_model();
            let expected = oracle_mec(&current);
            prop_assert_eq!(dm.decomposition(), expected.clone());

            let mec_of = expected.mec_index(n);
            for a in 0..n {
                for b in 0..n {
                    let same = if a == b {
                        !model.is_random(a) || mec_of[a].is_some()
                    } else {
                        mec_of[a].is_some() && mec_of[a] == mec_of[b]
                    };
                    prop_assert_eq!(dm.same_mec(a, b), same, "same_mec({}, {})", a, b);
                }
            }
            for h in fresh {
                prop_assert!(expected.mecs.contains(&dm.members(h)));
            }
            // Nothing inside a MEC of the current MDP is deleted, apart from
            // the requested edge itself.
            for &(x, y) in &dm.deletion_trace()[before..] {
                if (x, y) != (u, v) {
                    prop_assert!(mec_of[x].is_none() || mec_of[x] != mec_of[y], "cut ({}, {}) inside a MEC", x, y);
                }
            }
            for snap in &snapshots {
                check_worklist(snap, &expected.mecs)?;
            }
            for x in dm.take_released() {
                released[x] = true;
            }
            for m in &expected.mecs {
                prop_assert!(m.iter().all(|x| !released[x]), "released vertex back in {:?}", m);
            }
        }
        let mut trace = dm.deletion_trace().to_vec();
        trace.sort_unstable();
        trace.dedup();
        prop_assert_eq!(trace.len(), dm.deletion_trace().len());
    }

    #[test]
    fn batch_deletion_matches_one_by_one((inst, order) in arb_sequence(25)) {
        let half = order.len() / 2;
        let mut one = DecMec::new(&inst.model);
        for &(u, v) in &order[..half] {
            one.delete_player_edge(u, v).unwrap();
        }
        let mut batch = DecMec::new(&inst.model);
        let fresh = batch.delete_player_edges(&order[..half]).unwrap();
        prop_assert_eq!(one.decomposition(), batch.decomposition());
        let mecs = batch.mecs();
        for h in fresh {
            prop_assert!(mecs.contains(&batch.members(h)));
        }
    }
}
