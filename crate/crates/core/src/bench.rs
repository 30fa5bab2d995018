//! Experiment harness: seeded instance suites, solver dispatch, result rows,
//! summaries and CSV / JSON-lines output.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{extract_subnetwork, generate_graph, GeneratorSpec, NodeId, SocialGraph, SubNetwork};
use crate::heuristics::{h_mcop_outcome, mfpb_hostp_outcome};
use crate::oracle::optimal_path_capped;
use crate::outcome::{derive_seed, OptResult, SolveOutcome, SolverId, Status};
use crate::qa::{qa_solve, QaParams};
use crate::qot::{QoTConstraints, QoTWeights};
use crate::sa::{sa_solve, SaParams};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    InvalidSuite(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("suite file: {0}")]
    Toml(#[from] toml::de::Error),
}

/// Solver settings shared by the CLI and the harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub qa: QaParams,
    pub sa: SaParams,
    pub hmcop_lambda: f64,
    /// Path cap for exhaustive enumeration.
    pub oracle_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            qa: QaParams::default(),
            sa: SaParams::default(),
            hmcop_lambda: 2.0,
            oracle_cap: crate::oracle::DEFAULT_PATH_CAP,
        }
    }
}

/// Runs one solver on one subnetwork. The seed overrides the annealers'
/// configured seeds; the deterministic solvers ignore it.
pub fn run_solver(
    solver: SolverId,
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<SolveOutcome, String> {
    let started = Instant::now();
    let mut out = match solver {
        SolverId::Qa => qa_solve(sub, w, c, &QaParams { seed, ..cfg.qa }).map_err(|e| e.to_string())?,
        SolverId::Sa => sa_solve(sub, w, c, &SaParams { seed, ..cfg.sa }).map_err(|e| e.to_string())?,
        SolverId::Mfpb => mfpb_hostp_outcome(sub, w, c),
        SolverId::Hmcop => {
            if !(cfg.hmcop_lambda >= 1.0) {
                return Err(format!("hmcop lambda must be >= 1, got {}", cfg.hmcop_lambda));
            }
            h_mcop_outcome(sub, w, c, cfg.hmcop_lambda)
        }
        SolverId::Oracle => {
            let result = optimal_path_capped(sub, w, c, cfg.oracle_cap).map_err(|e| e.to_string())?;
            SolveOutcome::new(SolverId::Oracle, result)
        }
    };
    out.wall_time = started.elapsed().as_secs_f64();
    Ok(out)
}

/// Best of `restarts` runs of `solver`; run `i` uses
/// `derive_seed(seed, i)`. Telemetry is summed over the runs.
pub fn run_solver_restarts(
    solver: SolverId,
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    cfg: &SolverConfig,
    seed: u64,
    restarts: usize,
) -> Result<SolveOutcome, String> {
    let mut best: Option<SolveOutcome> = None;
    for i in 0..restarts.max(1) {
        let run = run_solver(solver, sub, w, c, cfg, derive_seed(seed, i as u64))?;
        match &mut best {
            None => best = Some(run),
            Some(b) => b.absorb(run),
        }
    }
    Ok(best.expect("at least one run"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSuite {
    pub scales: Vec<Scale>,
    pub weight_groups: Vec<QoTWeights>,
    pub constraints: QoTConstraints,
    pub pairs_per_scale: usize,
    pub solvers: Vec<SolverId>,
    pub restarts: usize,
    pub master_seed: u64,
    #[serde(default = "default_max_hops")]
    pub max_hops: usize,
    #[serde(default)]
    pub solver_config: SolverConfig,
}

fn default_max_hops() -> usize {
    6
}

pub const SCALE_COUNT: usize = 25;

/// Scales `1..=25`: nodes 50 to 400 and edges 63 to 2356, interpolated
/// linearly and rounded.
pub fn default_scales() -> Vec<Scale> {
    let lerp = |a: f64, b: f64, i: usize| (a + (b - a) * i as f64 / (SCALE_COUNT - 1) as f64).round() as usize;
    (0..SCALE_COUNT)
        .map(|i| Scale {
            nodes: lerp(50.0, 400.0, i),
            edges: lerp(63.0, 2356.0, i),
        })
        .collect()
}

pub fn default_weight_groups() -> Vec<QoTWeights> {
    [(0.25, 0.25, 0.5), (0.25, 0.5, 0.25), (0.5, 0.25, 0.25), (0.3, 0.3, 0.4)]
        .into_iter()
        .map(|(t, r, p)| QoTWeights::new(t, r, p).expect("valid default weights"))
        .collect()
}

pub fn default_constraints() -> QoTConstraints {
    QoTConstraints::new(0.05, 0.001, 0.3).expect("valid default constraints")
}

impl BenchSuite {
    /// The 25-scale desk suite comparing QA with MFPB_HOSTP, one pair per
    /// scale and a single QA run per instance.
    pub fn desk_scale() -> Self {
        Self {
            scales: default_scales(),
            weight_groups: default_weight_groups(),
            constraints: default_constraints(),
            pairs_per_scale: 1,
            solvers: vec![SolverId::Qa, SolverId::Mfpb],
            restarts: 1,
            master_seed: 2024,
            max_hops: 6,
            solver_config: SolverConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let suite: Self = toml::from_str(text)?;
        suite.validate()?;
        Ok(suite)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidSuite(m.to_string()));
        if self.scales.is_empty() || self.weight_groups.is_empty() || self.solvers.is_empty() {
            return bad("scales, weight_groups and solvers must be non-empty");
        }
        if self.pairs_per_scale == 0 || self.restarts == 0 {
            return bad("pairs_per_scale and restarts must be positive");
        }
        if self.max_hops == 0 {
            return bad("max_hops must be positive");
        }
        for s in &self.scales {
            if s.nodes < 2 {
                return bad("every scale needs at least two nodes");
            }
            if s.edges > s.nodes * (s.nodes - 1) / 2 {
                return bad("a scale asks for more edges than node pairs");
            }
        }
        self.solver_config.qa.validate().map_err(|e| BenchError::InvalidSuite(e.to_string()))?;
        self.solver_config.sa.validate().map_err(|e| BenchError::InvalidSuite(e.to_string()))?;
        Ok(())
    }
}

/// One solver run in a suite. Ids are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scale: usize,
    pub weight: usize,
    pub pair: usize,
    pub solver: SolverId,
    pub restart: usize,
    pub source: u64,
    pub target: u64,
    pub utility: Option<f64>,
    pub feasible: bool,
    /// A solver status, or `error: ...` when the run failed.
    pub status: String,
    pub wall_time: f64,
    pub steps: u64,
    pub seed: u64,
    /// Node ids joined by `-`; empty when no path was returned.
    pub path: String,
}

impl ResultRow {
    /// Equality ignoring `wall_time`.
    pub fn same_record(&self, other: &Self) -> bool {
        ResultRow {
            wall_time: 0.0,
            ..self.clone()
        } == ResultRow {
            wall_time: 0.0,
            ..other.clone()
        }
    }

    fn key(&self) -> (usize, usize, usize, usize, usize) {
        let solver = SolverId::ALL.iter().position(|s| *s == self.solver).unwrap_or(usize::MAX);
        (self.scale, self.weight, self.pair, solver, self.restart)
    }
}

const PAIR_ATTEMPTS: usize = 200;

/// Draws a source-target pair with a non-empty subnetwork. Falls back to
/// the last draw when none is found.
fn sample_pair(g: &SocialGraph, max_hops: usize, seed: u64) -> (SubNetwork, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.node_count();
    let mut last = None;
    for _ in 0..PAIR_ATTEMPTS {
        let s = rng.gen_range(0..n);
        let mut d = rng.gen_range(0..n - 1);
        if d >= s {
            d += 1;
        }
        let started = Instant::now();
        let sub = extract_subnetwork(g, g.id_of(s), g.id_of(d), max_hops).expect("ids come from the graph");
        let elapsed = started.elapsed().as_secs_f64();
        if !sub.is_empty() {
            return (sub, elapsed);
        }
        last = Some((sub, elapsed));
    }
    last.expect("at least one attempt")
}

fn row_from(
    ids: (usize, usize, usize, usize),
    sub: &SubNetwork,
    seed: u64,
    out: Result<SolveOutcome, String>,
    solver: SolverId,
) -> ResultRow {
    let (scale, weight, pair, restart) = ids;
    let mut row = ResultRow {
        scale,
        weight,
        pair,
        solver,
        restart,
        source: sub.source_id().0,
        target: sub.target_id().0,
        utility: None,
        feasible: false,
        status: String::new(),
        wall_time: 0.0,
        steps: 0,
        seed,
        path: String::new(),
    };
    match out {
        Ok(o) => {
            row.utility = o.result.utility;
            row.feasible = o.result.feasible;
            row.status = o.result.status.to_string();
            row.wall_time = o.wall_time;
            row.steps = o.steps_executed;
            row.path = o.result.path.as_ref().map(|p| p.display_ids(sub)).unwrap_or_default();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

/// Runs every scale x weight group x pair x solver x restart combination.
/// Rows come back in canonical key order.
pub fn run_benchmark(suite: &BenchSuite) -> Result<Vec<ResultRow>, BenchError> {
    run_benchmark_with(suite, |_| {})
}

/// Like [`run_benchmark`], reporting each row as it completes.
pub fn run_benchmark_with<F>(suite: &BenchSuite, mut progress: F) -> Result<Vec<ResultRow>, BenchError>
where
    F: FnMut(&ResultRow),
{
    suite.validate()?;
    let mut rows = Vec::new();
    for (si, scale) in suite.scales.iter().enumerate() {
        let scale_seed = derive_seed(suite.master_seed, si as u64);
        let g = generate_graph(&GeneratorSpec::new(scale.nodes, scale.edges, derive_seed(scale_seed, 0)))
            .map_err(|e| BenchError::InvalidSuite(e.to_string()))?;
        for pi in 0..suite.pairs_per_scale {
            let pair_seed = derive_seed(scale_seed, 1 + pi as u64);
            let (sub, extract_time) = sample_pair(&g, suite.max_hops, derive_seed(pair_seed, 0));
            for (wi, w) in suite.weight_groups.iter().enumerate() {
                for &solver in &suite.solvers {
                    for r in 0..suite.restarts {
                        let seed = derive_seed(
                            pair_seed,
                            1 + ((wi as u64) << 40 | (solver as u64) << 32 | r as u64),
                        );
                        let mut out = run_solver(solver, &sub, w, &suite.constraints, &suite.solver_config, seed);
                        if let Ok(o) = &mut out {
                            if matches!(solver, SolverId::Mfpb | SolverId::Hmcop) {
                                o.wall_time += extract_time;
                            }
                        }
                        let row = row_from((si + 1, wi + 1, pi + 1, r + 1), &sub, seed, out, solver);
                        progress(&row);
                        rows.push(row);
                    }
                }
            }
        }
    }
    rows.sort_by_key(|r| r.key());
    Ok(rows)
}

/// Aggregate over one `(scale, weight, solver)` group. `scale` is `all` for
/// the pooled rows of a weight group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scale: String,
    pub weight: usize,
    pub solver: SolverId,
    pub rows: usize,
    pub mean_utility: Option<f64>,
    pub feasible_rate: f64,
    pub mean_wall_time: f64,
    /// `(mean - mean_mfpb) / mean_mfpb` on the same group.
    pub gain_vs_mfpb: Option<f64>,
}

#[derive(Default)]
struct Acc {
    rows: usize,
    feasible: usize,
    utility_sum: f64,
    time_sum: f64,
}

impl Acc {
    fn add(&mut self, r: &ResultRow) {
        self.rows += 1;
        self.time_sum += r.wall_time;
        if r.feasible {
            if let Some(u) = r.utility {
                self.feasible += 1;
                self.utility_sum += u;
            }
        }
    }

    fn mean_utility(&self) -> Option<f64> {
        (self.feasible > 0).then(|| self.utility_sum / self.feasible as f64)
    }
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let solver_pos = |s: SolverId| SolverId::ALL.iter().position(|x| *x == s).unwrap_or(usize::MAX);
    // Pooled rows use scale `usize::MAX` so they sort last.
    let mut groups: BTreeMap<(usize, usize, usize), (SolverId, Acc)> = BTreeMap::new();
    for r in rows {
        for scale in [r.scale, usize::MAX] {
            groups
                .entry((scale, r.weight, solver_pos(r.solver)))
                .or_insert_with(|| (r.solver, Acc::default()))
                .1
                .add(r);
        }
    }
    let mfpb_pos = solver_pos(SolverId::Mfpb);
    groups
        .iter()
        .map(|(&(scale, weight, _), (solver, acc))| {
            let mean = acc.mean_utility();
            let base = groups
                .get(&(scale, weight, mfpb_pos))
                .and_then(|(_, a)| a.mean_utility());
            let gain = match (mean, base) {
                (Some(m), Some(b)) if b != 0.0 => Some((m - b) / b),
                _ => None,
            };
            SummaryRow {
                scale: if scale == usize::MAX { "all".into() } else { scale.to_string() },
                weight,
                solver: *solver,
                rows: acc.rows,
                mean_utility: mean,
                feasible_rate: acc.feasible as f64 / acc.rows as f64,
                mean_wall_time: acc.time_sum / acc.rows as f64,
                gain_vs_mfpb: gain,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl Format {
    /// `.jsonl` and `.ndjson` select JSON lines; anything else is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::JsonLines,
            _ => Format::Csv,
        }
    }
}

/// A record type with a fixed CSV header.
pub trait Record: Serialize {
    const HEADER: &'static [&'static str];
}

impl Record for ResultRow {
    const HEADER: &'static [&'static str] = &[
        "scale", "weight", "pair", "solver", "restart", "source", "target", "utility", "feasible", "status",
        "wall_time", "steps", "seed", "path",
    ];
}

impl Record for SummaryRow {
    const HEADER: &'static [&'static str] = &[
        "scale",
        "weight",
        "solver",
        "rows",
        "mean_utility",
        "feasible_rate",
        "mean_wall_time",
        "gain_vs_mfpb",
    ];
}

/// Writes records with a header (CSV) or one object per line.
pub fn emit<T: Record, W: Write>(records: &[T], format: Format, mut out: W) -> Result<(), BenchError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(T::HEADER)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Parses records written by [`emit`].
pub fn parse<T: for<'de> Deserialize<'de>, R: Read>(input: R, format: Format) -> Result<Vec<T>, BenchError> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(input);
            r.deserialize().map(|x| x.map_err(BenchError::from)).collect()
        }
        Format::JsonLines => {
            let mut text = String::new();
            let mut input = input;
            input.read_to_string(&mut text)?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| serde_json::from_str(l).map_err(BenchError::from))
                .collect()
        }
    }
}

/// Rows of a finished run keyed by instance: `(scale, weight, pair)`.
pub fn by_instance(rows: &[ResultRow]) -> BTreeMap<(usize, usize, usize), Vec<&ResultRow>> {
    let mut m: BTreeMap<_, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        m.entry((r.scale, r.weight, r.pair)).or_default().push(r);
    }
    m
}

/// Node ids of a row's path.
pub fn row_path_ids(row: &ResultRow) -> Vec<NodeId> {
    if row.path.is_empty() {
        return Vec::new();
    }
    row.path
        .split('-')
        .filter_map(|s| s.parse().ok())
        .map(NodeId)
        .collect()
}

/// True if the outcome is a returned feasible path.
pub fn is_feasible_result(r: &OptResult) -> bool {
    r.status == Status::OptimalFound && r.feasible
}
