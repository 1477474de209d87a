//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streett_cli::bench::{bench_instance, measure, run_bench, BenchConfig, BenchSuite, Row};
use streett_core::format::write_deletions;
use streett_core::generate::{generate, GenConfig, Kind};
use streett_core::mdp_streett::{equivalence_check_split, solve_mdp};
use streett_core::mec::{mec_decomposition_with, MecOptions};
use streett_core::oracles::{exhaustive_streett, oracle_asw_reach, oracle_mdp_streett, oracle_mec, oracle_streett_graph};
use streett_core::{
    asw_reach, mec_decomposition, solve_graph, winning_set_graph, winning_set_mdp, DecMec, Edge, Instance,
    VertexSet,
};

type Verdict = Result<String, String>;

fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Random instance with `n <= max_n`, `m <= min(max_m, 4n, n^2)` and
/// `k <= max_k`.
fn sample(rng: &mut ChaCha8Rng, kind: Kind, max_n: usize, max_m: usize, max_k: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(0..=max_m.min(4 * n).min(n * n));
    let k = rng.random_range(0..=max_k);
    let mut config = GenConfig::new(kind, n, m, k, rng.random());
    config.p_random = rng.random_range(0.1..0.5);
    config.request_mean = rng.random_range(0.5..3.0);
    config.grant_mean = rng.random_range(0.2..2.0);
    generate(&config).expect("m <= n^2")
}

fn player_edges(inst: &Instance) -> Vec<Edge> {
    inst.model
        .edges()
        .iter()
        .copied()
        .filter(|&(u, _)| !inst.model.is_random(u))
        .collect()
}

fn no_repeats(trace: &[Edge]) -> bool {
    let mut sorted = trace.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Checks of criterion 8 made while the other criteria run.
#[derive(Default)]
struct Charges {
    runs: usize,
    failures: Vec<String>,
}

impl Charges {
    fn small(&mut self, what: &str, n: usize, charges: &[u32]) {
        let bound = ceil_log2(n) + 1;
        if let Some((v, &c)) = charges.iter().enumerate().find(|&(_, &c)| c > bound) {
            self.failures.push(format!("{what}: vertex {v} charged {c} times, bound {bound}"));
        }
    }

    fn k_entries(&mut self, what: &str, n: usize, entries: u32) {
        if entries > ceil_log2(n) {
            self.failures.push(format!("{what}: {entries} K entries, bound {}", ceil_log2(n)));
        }
    }

    fn trace(&mut self, what: &str, trace: &[Edge]) {
        self.runs += 1;
        if !no_repeats(trace) {
            self.failures.push(format!("{what}: an edge was deleted twice"));
        }
    }
}

fn graph_equivalence(charges: &mut Charges) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let trials = 1000;
    let mut mixed = 0;
    for trial in 0..trials {
        let inst = sample(&mut rng, Kind::Graph, 40, 160, 4);
        let report = solve_graph(&inst.model, &inst.spec, trial).map_err(|e| e.to_string())?;
        let oracle = oracle_streett_graph(&inst.model, &inst.spec);
        if report.winning != oracle {
            return Err(format!("trial {trial}: fast {:?} oracle {:?}", report.winning, oracle));
        }
        let n = inst.model.vertex_count();
        mixed += usize::from(!oracle.is_empty() && oracle.len() < n);
        charges.small("graph-streett", n, &report.small_charges);
        charges.k_entries("graph-streett", n, report.stats.max_k_entries);
        charges.trace("graph-streett", &report.trace);
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("{trials} instances took {elapsed:.1?}"));
    }
    Ok(format!("{trials} instances ({mixed} with a proper non-empty winning set) in {elapsed:.1?}"))
}

fn exponential_ground_truth() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 300;
    for trial in 0..trials {
        let graph = sample(&mut rng, Kind::Graph, 12, 48, 3);
        let truth = exhaustive_streett(&graph.model, &graph.spec).map_err(|e| e.to_string())?;
        let oracle = oracle_streett_graph(&graph.model, &graph.spec);
        if oracle != truth {
            return Err(format!("graph trial {trial}: oracle {oracle:?} enumeration {truth:?}"));
        }
        let mdp = sample(&mut rng, Kind::Mdp, 12, 48, 3);
        let truth = exhaustive_streett(&mdp.model, &mdp.spec).map_err(|e| e.to_string())?;
        let oracle = oracle_mdp_streett(&mdp.model, &mdp.spec);
        if oracle != truth {
            return Err(format!("mdp trial {trial}: oracle {oracle:?} enumeration {truth:?}"));
        }
    }
    Ok(format!("{trials} graphs and {trials} MDPs"))
}

fn mec_equivalence(charges: &mut Charges) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 1000;
    for trial in 0..trials {
        let inst = sample(&mut rng, Kind::Mdp, 40, 160, 0);
        let report = mec_decomposition_with(&inst.model, MecOptions { include_trivial: false, seed: trial });
        let oracle = oracle_mec(&inst.model);
        if report.decomposition != oracle {
            return Err(format!("trial {trial}: fast {:?} oracle {oracle:?}", report.decomposition));
        }
        if mec_decomposition(&inst.model) != oracle {
            return Err(format!("trial {trial}: default entry point disagrees"));
        }
        charges.small("mec", inst.model.vertex_count(), &report.small_charges);
        charges.trace("mec", &report.trace);
    }
    Ok(format!("{trials} MDPs"))
}

fn decremental_mec(charges: &mut Charges) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 200;
    let mut deletions = 0;
    for trial in 0..trials {
        let inst = sample(&mut rng, Kind::Mdp, 30, 90, 0);
        let n = inst.model.vertex_count();
        let mut order = player_edges(&inst);
        order.shuffle(&mut rng);
        let mut dm = DecMec::with_seed(&inst.model, trial);
        for (step, &(u, v)) in order.iter().enumerate() {
            dm.delete_player_edge(u, v).map_err(|e| e.to_string())?;
            deletions += 1;
            let oracle = oracle_mec(&dm.current_model());
            let fast = dm.decomposition();
            if fast != oracle {
                return Err(format!("trial {trial} step {step}: fast {fast:?} oracle {oracle:?}"));
            }
            let index = oracle.mec_index(n);
            for a in 0..n {
                for b in 0..n {
                    // A player vertex on its own is a trivial MEC.
                    let expected = if a == b {
                        !inst.model.is_random(a) || index[a].is_some()
                    } else {
                        index[a].is_some() && index[a] == index[b]
                    };
                    if dm.same_mec(a, b) != expected {
                        return Err(format!("trial {trial} step {step}: same_mec({a}, {b}) wrong"));
                    }
                }
            }
        }
        charges.small("dec-mec", n, dm.engine().small_charges());
        charges.trace("dec-mec", dm.deletion_trace());
    }
    Ok(format!("{trials} MDPs, {deletions} single deletions"))
}

fn almost_sure_reachability() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 1000;
    for trial in 0..trials {
        let inst = sample(&mut rng, Kind::Mdp, 40, 160, 0);
        let p = rng.random_range(0.02..0.4);
        let targets: VertexSet = (0..inst.model.vertex_count()).filter(|_| rng.random_bool(p)).collect();
        let fast = asw_reach(&inst.model, &targets);
        let oracle = oracle_asw_reach(&inst.model, &targets);
        if fast != oracle {
            return Err(format!("trial {trial}: targets {targets:?} fast {fast:?} oracle {oracle:?}"));
        }
    }
    Ok(format!("{trials} MDPs"))
}

fn mdp_equivalence(charges: &mut Charges) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trials = 1000;
    let mut graphs = 0;
    let mut mixed = 0;
    for trial in 0..trials {
        let kind = if trial % 5 == 0 { Kind::Graph } else { Kind::Mdp };
        let inst = sample(&mut rng, kind, 30, 120, 3);
        let report = solve_mdp(&inst.model, &inst.spec, trial).map_err(|e| e.to_string())?;
        let oracle = oracle_mdp_streett(&inst.model, &inst.spec);
        if report.winning != oracle {
            return Err(format!("trial {trial}: fast {:?} oracle {oracle:?}", report.winning));
        }
        mixed += usize::from(!oracle.is_empty() && oracle.len() < inst.model.vertex_count());
        if winning_set_mdp(&inst.model, &inst.spec).map_err(|e| e.to_string())? != oracle {
            return Err(format!("trial {trial}: default entry point disagrees"));
        }
        if inst.model.is_graph() {
            graphs += 1;
            let graph = winning_set_graph(&inst.model, &inst.spec).map_err(|e| e.to_string())?;
            if graph != report.winning {
                return Err(format!("trial {trial}: mdp {:?} graph {graph:?}", report.winning));
            }
        }
        let n = inst.model.vertex_count();
        // The solver runs on the split instance with 2n vertices.
        charges.small("mdp-streett", 2 * n, &report.small_charges);
        charges.k_entries("mdp-streett", n, report.stats.max_k_entries);
        charges.trace("mdp-streett", &report.trace);
    }
    Ok(format!("{trials} instances ({mixed} with a proper non-empty winning set), {graphs} without random vertices"))
}

const SEEDS: [u64; 5] = [0, 1, 7, 42, 0xdead_beef];

fn determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances = 50;
    for case in 0..instances {
        let graph = sample(&mut rng, Kind::Graph, 40, 160, 4);
        let mdp = sample(&mut rng, Kind::Mdp, 30, 120, 3);
        let mut order = player_edges(&mdp);
        order.shuffle(&mut rng);
        let run = |seed: u64| -> Result<Vec<String>, String> {
            let g = solve_graph(&graph.model, &graph.spec, seed).map_err(|e| e.to_string())?;
            let mut dm = DecMec::with_seed(&mdp.model, seed);
            let mut steps = String::new();
            for &(u, v) in &order {
                let fresh = dm.delete_player_edge(u, v).map_err(|e| e.to_string())?;
                let fresh: Vec<VertexSet> = fresh.into_iter().map(|h| dm.members(h)).collect();
                steps += &format!("{fresh:?} {:?}\n", dm.decomposition());
            }
            let mec = mec_decomposition_with(&mdp.model, MecOptions { include_trivial: false, seed });
            let m = solve_mdp(&mdp.model, &mdp.spec, seed).map_err(|e| e.to_string())?;
            Ok(vec![
                format!("{:?} {:?}", g.winning, g.witnesses),
                write_deletions(&g.trace),
                steps,
                write_deletions(dm.deletion_trace()),
                format!("{:?}", mec.decomposition),
                write_deletions(&mec.trace),
                format!("{:?} {:?} {:?}", m.winning, m.satisfying, m.witnesses),
                write_deletions(&m.trace),
            ])
        };
        let base = run(SEEDS[0])?;
        for &seed in &SEEDS[1..] {
            if run(seed)? != base {
                return Err(format!("case {case}: seed {seed} differs from seed {}", SEEDS[0]));
            }
        }
    }
    Ok(format!("{instances} instances x {} seeds", SEEDS.len()))
}

fn charging_bounds(charges: &Charges) -> Verdict {
    match charges.failures.first() {
        Some(f) => Err(format!("{} violations, first: {f}", charges.failures.len())),
        None => Ok(format!("{} runs of criteria 1, 3, 4 and 6", charges.runs)),
    }
}

const SIZES: [usize; 5] = [10_000, 30_000, 100_000, 300_000, 1_000_000];

fn scaling() -> Verdict {
    // Warm up allocator and caches.
    for suite in [BenchSuite::GraphStreett, BenchSuite::Mec] {
        measure(suite, &bench_instance(suite, SIZES[0], 99), 99);
    }
    let config = BenchConfig {
        suites: vec![BenchSuite::GraphStreett, BenchSuite::Mec],
        sizes: SIZES.to_vec(),
        reps: 3,
        seed: 1,
        timeout: Duration::from_secs(120),
    };
    let rows = run_bench(&config, |_| {});
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for suite in &config.suites {
        let rows: Vec<&Row> = rows.iter().filter(|r| r.suite == *suite).collect();
        let largest: Vec<&Row> = rows.iter().copied().filter(|r| r.m >= 1_000_000).collect();
        let worst = largest
            .iter()
            .map(|r| r.result.as_ref().map_or(f64::INFINITY, |m| m.seconds))
            .fold(0.0, f64::max);
        let slope = rows[0].slope;
        summary.push(format!(
            "{} slope {} m=1e6 {worst:.2}s",
            suite.name(),
            slope.map_or("none".to_string(), |s| format!("{s:.3}"))
        ));
        if rows.iter().any(|r| r.result.is_none()) || worst >= 120.0 {
            failures.push(format!("{} exceeded 120 s", suite.name()));
        }
        if slope.is_none_or(|s| s > 1.35) {
            failures.push(format!("{} slope above 1.35", suite.name()));
        }
    }
    let summary = summary.join(", ");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}: {summary}", failures.join("; ")))
    }
}

fn split_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let trials = 500;
    for trial in 0..trials {
        let inst = sample(&mut rng, Kind::Mdp, 12, 48, 3);
        if !equivalence_check_split(&inst.model, &inst.spec).map_err(|e| e.to_string())? {
            return Err(format!("trial {trial}: split instance disagrees"));
        }
    }
    Ok(format!("{trials} MDPs"))
}

fn report(id: usize, name: &str, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = panic::catch_unwind(AssertUnwindSafe(check))
        .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
    let elapsed = start.elapsed();
    match verdict {
        Ok(detail) => {
            println!("PASS {id:>2} {name}: {detail} [{elapsed:.1?}]");
            true
        }
        Err(detail) => {
            println!("FAIL {id:>2} {name}: {detail} [{elapsed:.1?}]");
            false
        }
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let mut charges = Charges::default();
    let results = [
        report(1, "graph Streett equivalence", || graph_equivalence(&mut charges)),
        report(2, "exponential ground truth", exponential_ground_truth),
        report(3, "MEC equivalence", || mec_equivalence(&mut charges)),
        report(4, "decremental MEC", || decremental_mec(&mut charges)),
        report(5, "almost-sure reachability", almost_sure_reachability),
        report(6, "MDP Streett equivalence", || mdp_equivalence(&mut charges)),
        report(7, "determinism across seeds", determinism),
        report(8, "charging bounds", || charging_bounds(&charges)),
        report(9, "near-linear scaling", scaling),
        report(10, "split-instance equivalence", split_equivalence),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
