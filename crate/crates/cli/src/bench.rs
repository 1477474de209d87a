//! Timed runs on generated instances and log-log scaling fits.

use std::io::Write;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use streett_core::generate::{generate, GenConfig, Kind};
use streett_core::mec::{mec_decomposition_with, MecOptions};
use streett_core::{solve_graph, Instance};

pub const BENCH_PAIRS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchSuite {
    GraphStreett,
    Mec,
}

impl BenchSuite {
    pub fn name(self) -> &'static str {
        match self {
            BenchSuite::GraphStreett => "graph-streett",
            BenchSuite::Mec => "mec",
        }
    }
}

/// Instance with `m` edges on `m / 4` vertices and 8 pairs whose sets add up
/// to about `m / 10` entries, mostly requests.
pub fn bench_instance(suite: BenchSuite, m: usize, seed: u64) -> Instance {
    let kind = match suite {
        BenchSuite::GraphStreett => Kind::Graph,
        BenchSuite::Mec => Kind::Mdp,
    };
    let n = (m / 4).max(2);
    let mut config = GenConfig::new(kind, n, m.min(n * n), BENCH_PAIRS, seed);
    config.grant_mean = 1.0;
    config.request_mean = (m as f64 / (10.0 * BENCH_PAIRS as f64) - config.grant_mean).max(0.0);
    generate(&config).expect("m <= n^2")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub seconds: f64,
    /// Edges deleted from the SCC engine.
    pub deletions: usize,
    /// Total small-piece charges over all vertices.
    pub small_charges: u64,
    /// Outer-loop iterations (graph Streett) or bottom-SCC rounds (MEC).
    pub iterations: u64,
}

pub fn measure(suite: BenchSuite, inst: &Instance, seed: u64) -> Measurement {
    let start = Instant::now();
    match suite {
        BenchSuite::GraphStreett => {
            let report = solve_graph(&inst.model, &inst.spec, seed).expect("generated graph");
            Measurement {
                seconds: start.elapsed().as_secs_f64(),
                deletions: report.trace.len(),
                small_charges: report.small_charges.iter().map(|&c| c as u64).sum(),
                iterations: report.stats.iterations,
            }
        }
        BenchSuite::Mec => {
            let report = mec_decomposition_with(&inst.model, MecOptions { include_trivial: false, seed });
            Measurement {
                seconds: start.elapsed().as_secs_f64(),
                deletions: report.trace.len(),
                small_charges: report.small_charges.iter().map(|&c| c as u64).sum(),
                iterations: report.rounds as u64,
            }
        }
    }
}

/// Like [`measure`], but gives up after `timeout`. The abandoned run keeps
/// its thread until it finishes.
pub fn measure_with_timeout(suite: BenchSuite, inst: Instance, seed: u64, timeout: Duration) -> Option<Measurement> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let _ = tx.send(measure(suite, &inst, seed));
    });
    rx.recv_timeout(timeout).ok()
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// distinct `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub suite: BenchSuite,
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub rep: usize,
    /// `None` when the run timed out.
    pub result: Option<Measurement>,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub suites: Vec<BenchSuite>,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub timeout: Duration,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    Some(xs[xs.len() / 2])
}

/// Runs every suite at every size `reps` times. The slope of each suite is
/// fitted to the median time per size; sizes with a timed-out run are left
/// out of the fit.
pub fn run_bench(config: &BenchConfig, mut progress: impl FnMut(&Row)) -> Vec<Row> {
    let mut rows = Vec::new();
    for &suite in &config.suites {
        let first = rows.len();
        let mut points = Vec::new();
        for &m in &config.sizes {
            let mut times = Vec::new();
            let mut timed_out = false;
            for rep in 0..config.reps {
                let seed = config.seed.wrapping_add(rep as u64);
                let inst = bench_instance(suite, m, seed);
                let (n, m_actual, b) = (inst.model.vertex_count(), inst.model.edge_count(), inst.spec.size());
                let result = measure_with_timeout(suite, inst, seed, config.timeout);
                match &result {
                    Some(r) => times.push(r.seconds),
                    None => timed_out = true,
                }
                let row = Row {
                    suite,
                    n,
                    m: m_actual,
                    b,
                    rep,
                    result,
                    slope: None,
                };
                progress(&row);
                rows.push(row);
            }
            if !timed_out {
                if let Some(t) = median(times) {
                    points.push((m as f64, t.max(1e-9)));
                }
            }
        }
        let slope = fit_slope(&points);
        for row in &mut rows[first..] {
            row.slope = slope;
        }
    }
    rows
}

pub fn write_csv(rows: &[Row], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "suite",
        "n",
        "m",
        "b",
        "rep",
        "seconds",
        "deletions",
        "small_charges",
        "iterations",
        "status",
        "slope",
    ])?;
    for row in rows {
        let (seconds, deletions, charges, iterations, status) = match &row.result {
            Some(r) => (
                format!("{:.6}", r.seconds),
                r.deletions.to_string(),
                r.small_charges.to_string(),
                r.iterations.to_string(),
                "ok",
            ),
            None => (String::new(), String::new(), String::new(), String::new(), "timeout"),
        };
        w.write_record([
            row.suite.name().to_string(),
            row.n.to_string(),
            row.m.to_string(),
            row.b.to_string(),
            row.rep.to_string(),
            seconds,
            deletions,
            charges,
            iterations,
            status.to_string(),
            row.slope.map(|s| format!("{s:.4}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
