mod common;

use common::arb_instance;
use proptest::prelude::*;
use streett_core::format::{parse_deletions, write_deletions};
use streett_core::graph_streett::{good_component, solve_graph_observed, LoopSnapshot};
use streett_core::oracles::oracle_streett_graph;
use streett_core::{parse_instance, write_instance, MdpModel, StreettPair, StreettSpec, VertexSet};

/// Hub 0 requests pair 4, which nothing grants. Without it the graph falls
/// apart into A = {1, 2, 3}, B = {4, 5}, C = {6, 7} and D = {8, .., 11}.
/// Vertex 2 requests pair 3, granted only in D; B requests and grants pair 1.
fn hub_instance() -> (MdpModel, StreettSpec) {
    let mut edges = vec![
        (1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3),
        (4, 5), (5, 4),
        (6, 7), (7, 6),
        (8, 9), (9, 10), (10, 11), (11, 8),
    ];
    for (into, back) in [(1, 3), (4, 5), (6, 7), (8, 11)] {
        edges.push((0, into));
        edges.push((back, 0));
    }
    let model = MdpModel::graph(12, edges).unwrap();
    let spec = StreettSpec::new(vec![
        StreettPair::new(vec![4], vec![5]),
        StreettPair::new(vec![], vec![]),
        StreettPair::new(vec![2], vec![9]),
        StreettPair::new(vec![0], vec![]),
    ]);
    (model, spec)
}

fn set(v: &[usize]) -> VertexSet {
    VertexSet::from_vec(v.to_vec())
}

#[test]
fn hub_run_follows_the_expected_queue() {
    let (model, spec) = hub_instance();
    let mut snapshots: Vec<LoopSnapshot> = Vec::new();
    let mut record = |s: &LoopSnapshot| snapshots.push(s.clone());
    let report = solve_graph_observed(&model, &spec, 0, Some(&mut record)).unwrap();

    let a = set(&[1, 2, 3]);
    let (b, c, d) = (set(&[4, 5]), set(&[6, 7]), set(&[8, 9, 10, 11]));
    let single = |x: &VertexSet| (x.clone(), vec![x.clone()]);
    // Removing the hub leaves four SCCs, each split off on its own.
    assert_eq!(
        snapshots[0].sets,
        vec![single(&a), single(&b), single(&c), single(&d)]
    );
    // A loses its bad vertex and falls apart into two self-loops.
    assert_eq!(
        snapshots[1].sets,
        vec![single(&b), single(&c), single(&d), single(&set(&[1])), single(&set(&[3]))]
    );
    // B is good and ends the search.
    assert_eq!(snapshots.len(), 3);
    assert_eq!(report.witnesses, vec![b.clone()]);
    assert_eq!(report.winning, (0..12).collect());
    assert_eq!(report.winning, oracle_streett_graph(&model, &spec));

    let whole: VertexSet = (0..12).collect();
    assert_eq!(good_component(&whole, &model, &spec).map(|g| g.members), Some(b));
}

#[test]
fn hub_with_bad_b_and_c_outputs_d() {
    let (model, mut spec) = hub_instance();
    spec = StreettSpec::new(
        spec.pairs()
            .iter()
            .enumerate()
            .map(|(j, p)| if j == 0 { StreettPair::new(vec![4, 6], vec![]) } else { p.clone() })
            .collect(),
    );
    let report = solve_graph_observed(&model, &spec, 0, None).unwrap();
    // B and C turn out bad; D is checked before the self-loops split off A.
    assert_eq!(report.witnesses, vec![set(&[8, 9, 10, 11])]);
    assert_eq!(report.winning, oracle_streett_graph(&model, &spec));
}

proptest! {
    #[test]
    fn instance_text_round_trips(inst in arb_instance(15, 4, true)) {
        let text = write_instance(&inst.model, &inst.spec);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_instance(&back.model, &back.spec), text);
    }

    #[test]
    fn deletion_text_round_trips(edges in proptest::collection::vec((0usize..50, 0usize..50), 0..20)) {
        let text = write_deletions(&edges);
        prop_assert_eq!(parse_deletions(&text).unwrap(), edges);
    }
}
