//! Seeded random instances.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

use crate::model::{Edge, Instance, MdpModel, Owner, StreettPair, StreettSpec, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Graph,
    Mdp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub kind: Kind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    /// Probability that a vertex is random (ignored for graphs).
    pub p_random: f64,
    /// Mean size of each request set.
    pub request_mean: f64,
    /// Mean size of each grant set.
    pub grant_mean: f64,
}

impl GenConfig {
    pub fn new(kind: Kind, n: usize, m: usize, k: usize, seed: u64) -> Self {
        GenConfig {
            kind,
            n,
            m,
            k,
            seed,
            p_random: 0.3,
            request_mean: 1.5,
            grant_mean: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GenError {
    #[error("cannot place {m} distinct edges on {n} vertices")]
    Infeasible { n: usize, m: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

fn geometric(mean: f64) -> Result<Geometric, GenError> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(GenError::BadParameter(format!("set size mean {mean}")));
    }
    Geometric::new(1.0 / (1.0 + mean)).map_err(|e| GenError::BadParameter(e.to_string()))
}

fn sample_set(rng: &mut ChaCha8Rng, n: usize, dist: &Geometric) -> VertexSet {
    let size = (dist.sample(rng) as usize).min(n);
    VertexSet::from_vec(index::sample(rng, n, size).into_vec())
}

/// Generates an instance with `m` distinct uniformly chosen edges. Random
/// vertices without successors get one extra edge, so an MDP may end up
/// with slightly more than `m` edges. The same config always yields the
/// same instance.
pub fn generate(config: &GenConfig) -> Result<Instance, GenError> {
    let GenConfig { n, m, k, .. } = *config;
    if m > 0 && (n == 0 || n.checked_mul(n).is_none_or(|nn| m > nn)) {
        return Err(GenError::Infeasible { n, m });
    }
    if !(0.0..=1.0).contains(&config.p_random) {
        return Err(GenError::BadParameter(format!("p_random {}", config.p_random)));
    }
    let requests = geometric(config.request_mean)?;
    let grants = geometric(config.grant_mean)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut edges: Vec<Edge> = if m == 0 {
        Vec::new()
    } else {
        index::sample(&mut rng, n * n, m)
            .into_iter()
            .map(|i| (i / n, i % n))
            .collect()
    };
    let owners: Vec<Owner> = (0..n)
        .map(|_| match config.kind {
            Kind::Mdp if rng.random_bool(config.p_random) => Owner::Random,
            _ => Owner::Player1,
        })
        .collect();
    let mut has_succ = vec![false; n];
    for &(u, _) in &edges {
        has_succ[u] = true;
    }
    for v in 0..n {
        if owners[v].is_random() && !has_succ[v] {
            edges.push((v, rng.random_range(0..n)));
        }
    }
    let pairs = (0..k)
        .map(|_| {
            let l = sample_set(&mut rng, n, &requests);
            let u = sample_set(&mut rng, n, &grants);
            StreettPair::new(l, u)
        })
        .collect();
    Ok(Instance {
        model: MdpModel::new(owners, edges).expect("generated edges are distinct and in range"),
        spec: StreettSpec::new(pairs),
    })
}
