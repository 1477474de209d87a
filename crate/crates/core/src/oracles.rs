//! Reference implementations built from static recomputation and subset
//! enumeration. They share the static primitives of [`crate::graph`] but
//! never touch the decremental engines.

use thiserror::Error;

use crate::graph::{attractor_within, reach_within, sccs_within};
use crate::mec::MecDecomposition;
use crate::model::{MdpModel, StreettSpec, Vertex, VertexSet};

/// Largest model the subset enumerators accept.
pub const MAX_ENUMERATION_N: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("subset enumeration needs n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
}

fn bad_vertices(spec: &StreettSpec, set: &VertexSet) -> VertexSet {
    set.iter()
        .filter(|&v| {
            spec.pairs()
                .iter()
                .any(|p| p.requests.contains(v) && !p.grants.intersects(set))
        })
        .collect()
}

fn has_inner_edge(model: &MdpModel, set: &VertexSet) -> bool {
    set.iter().any(|v| model.successors(v).any(|w| set.contains(w)))
}

fn mask_of(model: &MdpModel, set: &VertexSet) -> Vec<bool> {
    set.mask(model.vertex_count())
}

/// Graph Streett winning set by recursive static SCC decomposition.
pub fn oracle_streett_graph(model: &MdpModel, spec: &StreettSpec) -> VertexSet {
    let all: VertexSet = (0..model.vertex_count()).collect();
    let mut work = vec![all];
    let mut good: Vec<Vertex> = Vec::new();
    while let Some(set) = work.pop() {
        for scc in sccs_within(model, &mask_of(model, &set)) {
            if !has_inner_edge(model, &scc) {
                continue;
            }
            let bad = bad_vertices(spec, &scc);
            if bad.is_empty() {
                good.extend(scc.iter());
            } else {
                work.push(scc.difference(&bad));
            }
        }
    }
    let n = model.vertex_count();
    VertexSet::from_mask(&reach_within(model, &vec![true; n], &good))
}

/// Removes from `working` the random attractor of the random vertices that
/// have an edge leaving it, so that what is left is closed for random moves.
fn close_for_random(model: &MdpModel, working: &mut [bool]) {
    let leaking: Vec<Vertex> = (0..model.vertex_count())
        .filter(|&v| working[v] && model.is_random(v) && model.successors(v).any(|w| !working[w]))
        .collect();
    for v in attractor_within(model, working, &leaking) {
        working[v] = false;
    }
}

/// Non-trivial MECs of the sub-MDP on `set`, sorted by smallest member.
pub fn oracle_mecs_within(model: &MdpModel, set: &VertexSet) -> Vec<VertexSet> {
    let mut working = mask_of(model, set);
    close_for_random(model, &mut working);
    let mut mecs = Vec::new();
    loop {
        let sccs = sccs_within(model, &working);
        if sccs.is_empty() {
            break;
        }
        let mut bottom_members: Vec<Vertex> = Vec::new();
        for scc in sccs {
            let bottom = scc
                .iter()
                .all(|v| model.successors(v).all(|w| !working[w] || scc.contains(w)));
            if bottom {
                if has_inner_edge(model, &scc) {
                    mecs.push(scc.clone());
                }
                bottom_members.extend(scc.iter());
            }
        }
        for v in attractor_within(model, &working, &bottom_members) {
            working[v] = false;
        }
    }
    mecs.sort();
    mecs
}

/// MEC decomposition by repeated static SCC computation.
pub fn oracle_mec(model: &MdpModel) -> MecDecomposition {
    let all: VertexSet = (0..model.vertex_count()).collect();
    let mecs = oracle_mecs_within(model, &all);
    let covered: VertexSet = mecs.iter().flat_map(|m| m.iter()).collect();
    MecDecomposition {
        residue: all.difference(&covered),
        mecs,
    }
}

/// Copy of the model in which every target only has a self-loop.
fn make_absorbing(model: &MdpModel, targets: &VertexSet) -> MdpModel {
    let mut edges: Vec<(Vertex, Vertex)> = model
        .edges()
        .iter()
        .copied()
        .filter(|&(u, _)| !targets.contains(u))
        .collect();
    edges.extend(targets.iter().map(|t| (t, t)));
    MdpModel::derived(model.owners().to_vec(), edges).expect("valid edge set")
}

/// Almost-sure reachability of `targets` by the direct safety fixpoint.
pub fn oracle_asw_reach(model: &MdpModel, targets: &VertexSet) -> VertexSet {
    let model = make_absorbing(model, targets);
    let n = model.vertex_count();
    let mut working = vec![true; n];
    loop {
        let reach = reach_within(&model, &working, targets.as_slice());
        let losing: Vec<Vertex> = (0..n).filter(|&v| working[v] && !reach[v]).collect();
        if losing.is_empty() {
            break;
        }
        for v in attractor_within(&model, &working, &losing) {
            working[v] = false;
        }
    }
    VertexSet::from_mask(&working)
}

/// Searches a set that is closed for random moves for a good end-component
/// by recursively deleting bad vertices and recomputing MECs.
pub fn oracle_good_end_component(
    model: &MdpModel,
    spec: &StreettSpec,
    mec: &VertexSet,
) -> Option<VertexSet> {
    let mut work = vec![mec.clone()];
    while let Some(set) = work.pop() {
        let bad = bad_vertices(spec, &set);
        if bad.is_empty() {
            return Some(set);
        }
        work.extend(oracle_mecs_within(model, &set.difference(&bad)));
    }
    None
}

/// MECs that contain a good end-component.
pub fn oracle_satisfying_mecs(model: &MdpModel, spec: &StreettSpec) -> Vec<VertexSet> {
    oracle_mec(model)
        .mecs
        .into_iter()
        .filter(|m| oracle_good_end_component(model, spec, m).is_some())
        .collect()
}

/// MDP Streett winning set by static MEC recomputation.
pub fn oracle_mdp_streett(model: &MdpModel, spec: &StreettSpec) -> VertexSet {
    let targets: VertexSet = oracle_satisfying_mecs(model, spec)
        .iter()
        .flat_map(|m| m.iter())
        .collect();
    oracle_asw_reach(model, &targets)
}

fn check_size(n: usize) -> Result<(), OracleError> {
    if n > MAX_ENUMERATION_N {
        return Err(OracleError::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    Ok(())
}

fn subsets(n: usize) -> impl Iterator<Item = VertexSet> {
    (1u32..(1u32 << n)).map(move |bits| (0..n).filter(|&v| bits >> v & 1 == 1).collect())
}

/// Mutual reachability inside `set` checked by one forward and one backward
/// search from its smallest member.
fn strongly_connected(model: &MdpModel, set: &VertexSet) -> bool {
    let Some(root) = set.smallest() else {
        return false;
    };
    let search = |forward: bool| {
        let mut seen = vec![root];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            let next: Vec<Vertex> = if forward {
                model.successors(v).collect()
            } else {
                model.predecessors(v).collect()
            };
            for w in next {
                if set.contains(w) && !seen.contains(&w) {
                    seen.push(w);
                    stack.push(w);
                }
            }
        }
        seen.len() == set.len()
    };
    search(true) && search(false)
}

/// Every non-trivial end-component, found by subset enumeration.
pub fn enumerate_end_components(model: &MdpModel) -> Result<Vec<VertexSet>, OracleError> {
    let n = model.vertex_count();
    check_size(n)?;
    let mut out: Vec<VertexSet> = subsets(n)
        .filter(|x| {
            has_inner_edge(model, x)
                && x.iter()
                    .filter(|&v| model.is_random(v))
                    .all(|v| model.successors(v).all(|w| x.contains(w)))
                && strongly_connected(model, x)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// End-components not strictly contained in another one.
pub fn maximal_end_components(model: &MdpModel) -> Result<Vec<VertexSet>, OracleError> {
    let all = enumerate_end_components(model)?;
    Ok(all
        .iter()
        .filter(|x| !all.iter().any(|y| y != *x && x.is_subset(y)))
        .cloned()
        .collect())
}

/// End-components satisfying every pair.
pub fn enumerate_good_end_components(
    model: &MdpModel,
    spec: &StreettSpec,
) -> Result<Vec<VertexSet>, OracleError> {
    Ok(enumerate_end_components(model)?
        .into_iter()
        .filter(|x| spec.satisfied_by(x))
        .collect())
}

/// Ground-truth winning set: almost-sure reachability of the union of all
/// good end-components (on graphs: plain reachability of all good strongly
/// connected subgraphs).
pub fn exhaustive_streett(model: &MdpModel, spec: &StreettSpec) -> Result<VertexSet, OracleError> {
    let good: VertexSet = enumerate_good_end_components(model, spec)?
        .iter()
        .flat_map(|x| x.iter())
        .collect();
    if model.is_graph() {
        let n = model.vertex_count();
        return Ok(VertexSet::from_mask(&reach_within(
            model,
            &vec![true; n],
            good.as_slice(),
        )));
    }
    Ok(oracle_asw_reach(model, &good))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Owner, StreettPair};

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
    fn graph_oracle_examples() {
        let g = MdpModel::graph(2, vec![(0, 1), (1, 0)]).unwrap();
        let spec = StreettSpec::new(vec![StreettPair::new([0], [1])]);
        assert_eq!(oracle_streett_graph(&g, &spec), VertexSet::from([0, 1]));
        assert_eq!(exhaustive_streett(&g, &spec).unwrap(), VertexSet::from([0, 1]));
        let all_bad = StreettSpec::new(vec![StreettPair::new([0, 1], VertexSet::new())]);
        assert!(oracle_streett_graph(&g, &all_bad).is_empty());
    }

    #[test]
    fn mec_oracle_examples() {
        let r = MdpModel::new(vec![Owner::Random], vec![(0, 0)]).unwrap();
        assert_eq!(oracle_mec(&r).mecs, sets(&[&[0]]));
        let d = oracle_mec(&m1());
        assert_eq!(d.mecs, sets(&[&[1], &[2]]));
        assert_eq!(d.residue, VertexSet::from([0]));
        assert_eq!(maximal_end_components(&m1()).unwrap(), d.mecs);
        let dag = MdpModel::new(vec![Owner::Random, Owner::Player1], vec![(0, 1)]).unwrap();
        assert!(oracle_mec(&dag).mecs.is_empty());
    }

    #[test]
    fn asw_oracle_examples() {
        let m = m1();
        let all: VertexSet = (0..3).collect();
        assert_eq!(oracle_asw_reach(&m, &all), all);
        // Random vertex 0 may fall into the non-target sink 2.
        let m = MdpModel::new(
            vec![Owner::Random, Owner::Player1, Owner::Player1],
            vec![(0, 1), (0, 2)],
        )
        .unwrap();
        assert_eq!(oracle_asw_reach(&m, &VertexSet::from([1])), VertexSet::from([1]));
        let chain = MdpModel::graph(2, vec![(0, 1)]).unwrap();
        assert_eq!(
            oracle_asw_reach(&chain, &VertexSet::from([1])),
            VertexSet::from([0, 1])
        );
    }

    #[test]
    fn end_component_enumeration() {
        let p = MdpModel::graph(1, vec![(0, 0)]).unwrap();
        assert_eq!(enumerate_end_components(&p).unwrap(), sets(&[&[0]]));
        assert_eq!(enumerate_end_components(&m1()).unwrap(), sets(&[&[1], &[2]]));
        let dag = MdpModel::graph(3, vec![(0, 1), (1, 2)]).unwrap();
        assert!(enumerate_end_components(&dag).unwrap().is_empty());
        let big = MdpModel::graph(15, vec![]).unwrap();
        assert_eq!(
            enumerate_end_components(&big),
            Err(OracleError::TooLarge { n: 15, max: 14 })
        );
    }

    #[test]
    fn mdp_oracle_examples() {
        // 0(P) -> 1(R), 1 -> 0, 1 -> 2, 2(P) self-loop.
        let m = MdpModel::new(
            vec![Owner::Player1, Owner::Random, Owner::Player1],
            vec![(0, 1), (1, 0), (1, 2), (2, 2)],
        )
        .unwrap();
        let spec = StreettSpec::new(vec![StreettPair::new([0], [1])]);
        assert_eq!(oracle_satisfying_mecs(&m, &spec), sets(&[&[2]]));
        assert_eq!(oracle_mdp_streett(&m, &spec), exhaustive_streett(&m, &spec).unwrap());
        assert_eq!(oracle_mdp_streett(&m1(), &StreettSpec::empty()), VertexSet::from([0, 1, 2]));
    }
}
