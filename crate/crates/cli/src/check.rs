//! Fast paths against the oracles on seeded random instances.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streett_core::dec_mec::DecMec;
use streett_core::format::write_deletions;
use streett_core::generate::{generate, GenConfig, Kind};
use streett_core::oracles::{oracle_asw_reach, oracle_mdp_streett, oracle_mec, oracle_streett_graph};
use streett_core::{
    asw_reach, mec_decomposition, winning_set_graph, winning_set_mdp, write_instance, Edge, Instance, VertexSet,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Graph,
    Mec,
    Asreach,
    Mdp,
    Decmec,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Graph, Suite::Mec, Suite::Asreach, Suite::Mdp, Suite::Decmec];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Graph => "graph",
            Suite::Mec => "mec",
            Suite::Asreach => "asreach",
            Suite::Mdp => "mdp",
            Suite::Decmec => "decmec",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub suite: Suite,
    pub trial: usize,
    pub instance: Instance,
    pub detail: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "COUNTEREXAMPLE suite={} trial={}", self.suite.name(), self.trial)?;
        writeln!(f, "{}", self.detail)?;
        write!(f, "{}", write_instance(&self.instance.model, &self.instance.spec))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub trials: usize,
    pub max_n: usize,
    pub seed: u64,
}

/// Random instance for one trial: up to `max_n` vertices, up to `3n` edges
/// and up to 3 pairs.
pub fn trial_instance(suite: Suite, max_n: usize, seed: u64, trial: usize) -> (Instance, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let n = rng.random_range(1..=max_n.max(1));
    let m = rng.random_range(0..=(3 * n).min(n * n));
    let k = rng.random_range(0..=3);
    let kind = if suite == Suite::Graph { Kind::Graph } else { Kind::Mdp };
    let inst = generate(&GenConfig::new(kind, n, m, k, rng.random())).expect("m <= n^2");
    (inst, rng)
}

fn show(set: &VertexSet) -> String {
    format!("{:?}", set.as_slice())
}

fn mismatch(what: &str, fast: &VertexSet, oracle: &VertexSet) -> Option<String> {
    (fast != oracle).then(|| format!("{what}: fast {} oracle {}", show(fast), show(oracle)))
}

/// Runs one trial; `Some(detail)` on disagreement.
pub fn run_trial(suite: Suite, inst: &Instance, rng: &mut ChaCha8Rng) -> Option<String> {
    let (model, spec) = (&inst.model, &inst.spec);
    match suite {
        Suite::Graph => mismatch(
            "winning",
            &winning_set_graph(model, spec).expect("generated graph"),
            &oracle_streett_graph(model, spec),
        ),
        Suite::Mdp => mismatch(
            "winning",
            &winning_set_mdp(model, spec).expect("generated MDP"),
            &oracle_mdp_streett(model, spec),
        ),
        Suite::Mec => {
            let fast = mec_decomposition(model);
            let oracle = oracle_mec(model);
            (fast != oracle).then(|| format!("mecs: fast {fast:?} oracle {oracle:?}"))
        }
        Suite::Asreach => {
            let n = model.vertex_count();
            let targets: VertexSet = (0..n).filter(|_| rng.random_bool(0.2)).collect();
            mismatch(
                &format!("targets {}", show(&targets)),
                &asw_reach(model, &targets),
                &oracle_asw_reach(model, &targets),
            )
        }
        Suite::Decmec => {
            let mut order: Vec<Edge> = model
                .edges()
                .iter()
                .copied()
                .filter(|&(u, _)| !model.is_random(u))
                .collect();
            order.shuffle(rng);
            let mut dm = DecMec::new(model);
            for (i, &(u, v)) in order.iter().enumerate() {
                dm.delete_player_edge(u, v).expect("player edge of the model");
                let fast = dm.decomposition();
                let oracle = oracle_mec(&dm.current_model());
                if fast != oracle {
                    return Some(format!(
                        "after deletion {} of\n{}mecs: fast {fast:?} oracle {oracle:?}",
                        i + 1,
                        write_deletions(&order[..=i])
                    ));
                }
            }
            None
        }
    }
}

/// Runs `config.trials` trials of every suite in `suites`. Returns the
/// number of trials run, or the first counterexample.
pub fn run_check(suites: &[Suite], config: CheckConfig) -> Result<usize, Box<Counterexample>> {
    let mut ran = 0;
    for &suite in suites {
        for trial in 0..config.trials {
            let (instance, mut rng) = trial_instance(suite, config.max_n, config.seed, trial);
            if let Some(detail) = run_trial(suite, &instance, &mut rng) {
                return Err(Box::new(Counterexample {
                    suite,
                    trial,
                    instance,
                    detail,
                }));
            }
            ran += 1;
        }
    }
    Ok(ran)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_agree_on_a_few_trials() {
        let config = CheckConfig {
            trials: 40,
            max_n: 12,
            seed: 3,
        };
        assert_eq!(run_check(&Suite::ALL, config).unwrap(), 200);
    }

    #[test]
    fn zero_trials() {
        let config = CheckConfig {
            trials: 0,
            max_n: 12,
            seed: 3,
        };
        assert_eq!(run_check(&Suite::ALL, config).unwrap(), 0);
    }

    #[test]
    fn trials_are_reproducible() {
        let (a, _) = trial_instance(Suite::Mdp, 20, 5, 7);
        let (b, _) = trial_instance(Suite::Mdp, 20, 5, 7);
        assert_eq!(a, b);
    }
}
