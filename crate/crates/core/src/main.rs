use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use ostp_core::bench::{emit, parse, run_benchmark, run_solver_restarts, summarize, BenchSuite, Format, ResultRow, SolverConfig};
use ostp_core::graph::{extract_subnetwork, generate_graph, load_graph, GeneratorSpec, NodeId};
use ostp_core::outcome::SolverId;
use ostp_core::qa::TemperatureSchedule;
use ostp_core::qot::{QoTConstraints, QoTWeights};

#[derive(Parser)]
#[command(name = "ostp", version, about = "Optimal social trust path selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random graph.
    Generate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one source-target instance and print a JSON record.
    Solve(SolveArgs),
    /// Run a benchmark suite and write one row per run.
    Bench {
        /// Suite file (TOML); the 25-scale desk suite if omitted.
        #[arg(long)]
        suite: Option<PathBuf>,
        /// `.csv`, or `.jsonl` for JSON lines.
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate benchmark rows per scale, weight group and solver.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    source: u64,
    #[arg(long)]
    target: u64,
    #[arg(long, default_value = "qa")]
    solver: SolverId,
    /// wT,wr,wrho
    #[arg(long, default_value = "0.3,0.3,0.4")]
    weights: String,
    /// cT,cr,crho
    #[arg(long, default_value = "0.05,0.001,0.3")]
    constraints: String,
    #[arg(long, default_value_t = 6)]
    max_hops: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replica count.
    #[arg(long = "P")]
    replicas: Option<usize>,
    /// QA simulation temperature.
    #[arg(long = "T")]
    temperature: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Neighborhood pruning size.
    #[arg(long = "M")]
    prune: Option<usize>,
    /// Constraint penalty weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Independent runs; the best is reported.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// `fixed` or `linear:<T0>`.
    #[arg(long)]
    temp_schedule: Option<String>,
}

fn parse_triple(s: &str, what: &str) -> Result<(f64, f64, f64)> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("{what}: expected three comma-separated numbers, got '{s}'"))?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => bail!("{what}: expected three comma-separated numbers, got '{s}'"),
    }
}

fn parse_schedule(s: &str) -> Result<TemperatureSchedule> {
    if s == "fixed" {
        return Ok(TemperatureSchedule::Fixed);
    }
    if let Some(t0) = s.strip_prefix("linear:") {
        let t0 = t0.parse().with_context(|| format!("bad initial temperature '{t0}'"))?;
        return Ok(TemperatureSchedule::Linear { t0 });
    }
    bail!("temperature schedule must be 'fixed' or 'linear:<T0>', got '{s}'")
}

#[derive(Serialize)]
struct SolveRecord {
    solver: SolverId,
    source: u64,
    target: u64,
    status: String,
    utility: Option<f64>,
    feasible: bool,
    path: Option<String>,
    steps: u64,
    moves_attempted: u64,
    moves_accepted: u64,
    wall_time: f64,
}

fn solve(args: SolveArgs) -> Result<()> {
    let text = fs::read_to_string(&args.graph).with_context(|| format!("reading {}", args.graph.display()))?;
    let g = load_graph(&text).with_context(|| format!("parsing {}", args.graph.display()))?;
    let (a, b, c) = parse_triple(&args.weights, "weights")?;
    let w = QoTWeights::new(a, b, c)?;
    let (a, b, c) = parse_triple(&args.constraints, "constraints")?;
    let cons = QoTConstraints::new(a, b, c)?;
    let sub = extract_subnetwork(&g, NodeId(args.source), NodeId(args.target), args.max_hops)?;

    let mut cfg = SolverConfig::default();
    let qa = &mut cfg.qa;
    if let Some(v) = args.replicas {
        qa.replicas = v;
    }
    if let Some(v) = args.temperature {
        qa.temperature = v;
    }
    if let Some(v) = args.gamma0 {
        qa.gamma0 = v;
    }
    if let Some(v) = args.xi {
        qa.xi = v;
    }
    if let Some(s) = &args.temp_schedule {
        qa.temperature_schedule = parse_schedule(s)?;
    }
    if let Some(v) = args.max_steps {
        qa.max_steps = v;
        cfg.sa.max_steps = v;
    }
    if let Some(v) = args.prune {
        cfg.qa.prune = v;
        cfg.sa.prune = v;
    }
    if let Some(v) = args.beta {
        cfg.qa.penalty_beta = v;
        cfg.sa.penalty_beta = v;
    }
    cfg.qa.validate()?;
    cfg.sa.validate()?;
    if args.restarts == 0 {
        bail!("restarts must be positive");
    }

    let out = run_solver_restarts(args.solver, &sub, &w, &cons, &cfg, args.seed, args.restarts)
        .map_err(anyhow::Error::msg)?;
    let record = SolveRecord {
        solver: args.solver,
        source: args.source,
        target: args.target,
        status: out.result.status.to_string(),
        utility: out.result.utility,
        feasible: out.result.feasible,
        path: out.result.path.as_ref().map(|p| p.display_ids(&sub)),
        steps: out.steps_executed,
        moves_attempted: out.moves_attempted,
        moves_accepted: out.moves_accepted,
        wall_time: out.wall_time,
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { nodes, edges, seed, out } => {
            let g = generate_graph(&GeneratorSpec::new(nodes, edges, seed))?;
            let doc = g.to_document();
            match out {
                Some(p) => create(&p)?.write_all(doc.as_bytes())?,
                None => io::stdout().write_all(doc.as_bytes())?,
            }
        }
        Command::Solve(args) => solve(args)?,
        Command::Bench { suite, out } => {
            let suite = match suite {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    BenchSuite::from_toml(&text).with_context(|| format!("loading {}", p.display()))?
                }
                None => BenchSuite::desk_scale(),
            };
            let rows = run_benchmark(&suite)?;
            emit(&rows, Format::from_path(&out), create(&out)?)?;
        }
        Command::Summarize { input, out } => {
            let file = File::open(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows: Vec<ResultRow> = parse(BufReader::new(file), Format::from_path(&input))?;
            if rows.is_empty() {
                bail!("{} holds no rows", input.display());
            }
            emit(&summarize(&rows), Format::from_path(&out), create(&out)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
