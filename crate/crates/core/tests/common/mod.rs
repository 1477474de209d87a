#![allow(dead_code)]

use proptest::prelude::*;
use streett_core::{Edge, Instance, MdpModel, Owner, StreettPair, StreettSpec, Vertex};

/// Random instance with up to `max_n` vertices and `max_k` pairs. Random
/// vertices without successors get a self-loop.
pub fn arb_instance(max_n: usize, max_k: usize, random: bool) -> impl Strategy<Value = Instance> {
    (1..=max_n).prop_flat_map(move |n| {
        let owners = proptest::collection::vec(prop::bool::weighted(if random { 0.3 } else { 0.0 }), n);
        let edges = proptest::collection::vec((0..n, 0..n), 0..=3 * n);
        let set = proptest::collection::vec(0..n, 0..=3);
        let pairs = proptest::collection::vec((set.clone(), proptest::collection::vec(0..n, 0..=2)), 0..=max_k);
        (owners, edges, pairs).prop_map(move |(owners, edges, pairs)| build(n, owners, edges, pairs))
    })
}

pub fn build(
    n: usize,
    random: Vec<bool>,
    mut edges: Vec<Edge>,
    pairs: Vec<(Vec<Vertex>, Vec<Vertex>)>,
) -> Instance {
    edges.sort_unstable();
    edges.dedup();
    let mut has_succ = vec![false; n];
    for &(u, _) in &edges {
        has_succ[u] = true;
    }
    for v in 0..n {
        if random[v] && !has_succ[v] {
            edges.push((v, v));
        }
    }
    let owners = random
        .iter()
        .map(|&r| if r { Owner::Random } else { Owner::Player1 })
        .collect();
    Instance {
        model: MdpModel::new(owners, edges).unwrap(),
        spec: StreettSpec::new(pairs.into_iter().map(|(l, u)| StreettPair::new(l, u)).collect()),
    }
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}
