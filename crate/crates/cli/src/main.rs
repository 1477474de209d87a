use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use streett_cli::bench::{run_bench, write_csv, BenchConfig, BenchSuite};
use streett_cli::check::{run_check, CheckConfig, Suite};
use streett_cli::digest::{hex, partition_digest};
use streett_core::dec_mec::DecMec;
use streett_core::format::parse_deletions;
use streett_core::generate::{generate, GenConfig, Kind};
use streett_core::mdp_streett::solve_mdp;
use streett_core::mec::{asw_reach_report, mec_decomposition_with, MecOptions};
use streett_core::{parse_instance, solve_graph, write_instance, Instance, MecDecomposition, VertexSet};

#[derive(Parser)]
#[command(name = "streett", version, about = "Streett objectives on graphs and MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Winning set of a Streett objective on a graph.
    GraphStreett(SolveArgs),
    /// Winning set of a Streett objective on an MDP.
    MdpStreett(SolveArgs),
    /// Maximal end-component decomposition.
    Mec(SolveArgs),
    /// Almost-sure reachability.
    Asreach {
        #[command(flatten)]
        solve: SolveArgs,
        /// Target vertices, comma separated.
        #[arg(long, required = true, value_delimiter = ',')]
        target: Vec<usize>,
    },
    /// Replays player-1 edge deletions and reports the MECs after each.
    Decmec {
        #[command(flatten)]
        solve: SolveArgs,
        /// File of `D <u> <v>` lines.
        #[arg(long)]
        deletions: PathBuf,
        /// Print every MEC after every step, not only digests.
        #[arg(long)]
        verbose: bool,
    },
    /// Generates a random instance.
    Gen(GenArgs),
    /// Compares the fast algorithms with the oracles on random instances.
    Check(CheckArgs),
    /// Times the graph Streett and MEC algorithms; writes CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    instance: PathBuf,
    #[arg(long)]
    json: bool,
    /// Seed for the engines' internal processing order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Graph,
    Mdp,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    p_random: f64,
    #[arg(long, default_value_t = 1.5)]
    request_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    grant_mean: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Graph,
    Mec,
    Asreach,
    Mdp,
    Decmec,
    All,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 20)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchSuiteArg {
    GraphStreett,
    Mec,
    All,
}

#[derive(Args)]
struct BenchArgs {
    /// Edge counts, comma separated; `1e5` notation is accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "1e4,3e4,1e5")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BenchSuiteArg::All)]
    suite: BenchSuiteArg,
    /// Per-case timeout in seconds.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_size(s: &str) -> Result<usize, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("invalid size `{s}`"))?;
    if !(x >= 1.0 && x.is_finite() && x.fract() == 0.0) {
        return Err(format!("invalid size `{s}`"));
    }
    Ok(x as usize)
}

/// Failure of a command; every variant maps to exit code 2.
#[derive(Debug)]
struct Invalid(String);

impl<E: std::fmt::Display> From<E> for Invalid {
    fn from(e: E) -> Self {
        Invalid(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Invalid> {
    fs::read_to_string(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Invalid> {
    parse_instance(&read(path)?).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

fn ids(set: &VertexSet) -> String {
    set.iter().map(|v| format!(" {v}")).collect()
}

fn to_json(set: &VertexSet) -> Value {
    json!(set.as_slice())
}

fn decomposition_json(d: &MecDecomposition) -> (Value, Value) {
    (Value::Array(d.mecs.iter().map(to_json).collect()), to_json(&d.residue))
}

fn emit(out: &mut impl Write, args: &SolveArgs, text: String, value: Value) -> io::Result<()> {
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"))
    } else {
        write!(out, "{text}")
    }
}

fn winning(out: &mut impl Write, args: &SolveArgs, winning: &VertexSet) -> io::Result<()> {
    emit(out, args, format!("WINNING{}\n", ids(winning)), json!({ "winning": to_json(winning) }))
}

fn mec_text(d: &MecDecomposition) -> String {
    let mut text: String = d.mecs.iter().map(|m| format!("MEC{}\n", ids(m))).collect();
    text.push_str(&format!("RESIDUE{}\n", ids(&d.residue)));
    text
}

fn run(command: Command, out: &mut impl Write) -> Result<ExitCode, Invalid> {
    match command {
        Command::GraphStreett(args) => {
            let inst = load(&args.instance)?;
            let report = solve_graph(&inst.model, &inst.spec, args.seed)?;
            winning(out, &args, &report.winning)?;
        }
        Command::MdpStreett(args) => {
            let inst = load(&args.instance)?;
            let report = solve_mdp(&inst.model, &inst.spec, args.seed)?;
            winning(out, &args, &report.winning)?;
        }
        Command::Mec(args) => {
            let inst = load(&args.instance)?;
            let options = MecOptions {
                include_trivial: false,
                seed: args.seed,
            };
            let d = mec_decomposition_with(&inst.model, options).decomposition;
            let (mecs, residue) = decomposition_json(&d);
            emit(out, &args, mec_text(&d), json!({ "mecs": mecs, "residue": residue }))?;
        }
        Command::Asreach { solve, target } => {
            let inst = load(&solve.instance)?;
            let n = inst.model.vertex_count();
            if let Some(&t) = target.iter().find(|&&t| t >= n) {
                return Err(Invalid(format!("target {t} out of range (n = {n})")));
            }
            let targets = VertexSet::from_vec(target);
            let report = asw_reach_report(&inst.model, &targets, solve.seed);
            winning(out, &solve, &report.winning)?;
        }
        Command::Decmec {
            solve,
            deletions,
            verbose,
        } => {
            let inst = load(&solve.instance)?;
            let edges = parse_deletions(&read(&deletions)?)
                .map_err(|e| Invalid(format!("{}: {e}", deletions.display())))?;
            let mut dm = DecMec::with_seed(&inst.model, solve.seed);
            let mut text = String::new();
            let mut steps = Vec::new();
            let initial = dm.decomposition();
            text.push_str(&format!("INIT {}\n", hex(partition_digest(&initial.mecs))));
            for (i, &(u, v)) in edges.iter().enumerate() {
                dm.delete_player_edge(u, v)
                    .map_err(|e| Invalid(format!("deletion {}: {e}", i + 1)))?;
                let d = dm.decomposition();
                let digest = hex(partition_digest(&d.mecs));
                text.push_str(&format!("STEP {} {u} {v} {digest}\n", i + 1));
                let mut step = json!({ "step": i + 1, "edge": [u, v], "digest": digest });
                if verbose {
                    text.push_str(&mec_text(&d));
                    let (mecs, residue) = decomposition_json(&d);
                    step["mecs"] = mecs;
                    step["residue"] = residue;
                }
                steps.push(step);
            }
            let last = dm.decomposition();
            let (mecs, residue) = decomposition_json(&last);
            text.push_str("FINAL\n");
            text.push_str(&mec_text(&last));
            let value = json!({
                "initial_digest": hex(partition_digest(&initial.mecs)),
                "steps": steps,
                "mecs": mecs,
                "residue": residue,
            });
            emit(out, &solve, text, value)?;
        }
        Command::Gen(args) => {
            let kind = match args.kind {
                KindArg::Graph => Kind::Graph,
                KindArg::Mdp => Kind::Mdp,
            };
            let mut config = GenConfig::new(kind, args.n, args.m, args.k, args.seed);
            config.p_random = args.p_random;
            config.request_mean = args.request_mean;
            config.grant_mean = args.grant_mean;
            let inst = generate(&config)?;
            let text = write_instance(&inst.model, &inst.spec);
            match args.out {
                Some(path) => fs::write(&path, text).map_err(|e| Invalid(format!("{}: {e}", path.display())))?,
                None => write!(out, "{text}")?,
            }
        }
        Command::Check(args) => {
            let suites: Vec<Suite> = match args.suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                SuiteArg::Graph => vec![Suite::Graph],
                SuiteArg::Mec => vec![Suite::Mec],
                SuiteArg::Asreach => vec![Suite::Asreach],
                SuiteArg::Mdp => vec![Suite::Mdp],
                SuiteArg::Decmec => vec![Suite::Decmec],
            };
            if args.max_n == 0 {
                return Err(Invalid("--max-n must be at least 1".into()));
            }
            let config = CheckConfig {
                trials: args.trials,
                max_n: args.max_n,
                seed: args.seed,
            };
            match run_check(&suites, config) {
                Ok(ran) => writeln!(out, "OK {ran} trials")?,
                Err(cx) => {
                    write!(out, "{cx}")?;
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Bench(args) => {
            let suites = match args.suite {
                BenchSuiteArg::All => vec![BenchSuite::GraphStreett, BenchSuite::Mec],
                BenchSuiteArg::GraphStreett => vec![BenchSuite::GraphStreett],
                BenchSuiteArg::Mec => vec![BenchSuite::Mec],
            };
            let config = BenchConfig {
                suites,
                sizes: args.sizes,
                reps: args.reps.max(1),
                seed: args.seed,
                timeout: Duration::from_secs(args.timeout),
            };
            let rows = run_bench(&config, |row| {
                let status = match &row.result {
                    Some(r) => format!("{:.3}s", r.seconds),
                    None => "timeout".into(),
                };
                eprintln!("{} m={} rep={} {status}", row.suite.name(), row.m, row.rep);
            });
            match args.out {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
                    write_csv(&rows, file)?;
                }
                None => write_csv(&rows, &mut *out)?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
