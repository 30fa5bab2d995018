//! Trust-annotated social graph: participants carry a role-impact factor,
//! edges carry trust and intimacy and are always stored in both directions.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qot::QoTWeights;

/// External participant identifier as it appears in graph files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Participant {
    pub id: NodeId,
    pub rho: f64,
}

/// Per-edge quality-of-trust attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeQoT {
    pub trust: f64,
    pub intimacy: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate node id {id}")]
    DuplicateNode { line: usize, id: NodeId },
    #[error("line {line}: {field} value {value} out of range")]
    OutOfRange {
        line: usize,
        field: &'static str,
        value: f64,
    },
    #[error("line {line}: self-loop on node {id}")]
    SelfLoop { line: usize, id: NodeId },
    #[error("line {line}: edge references unknown node {id}")]
    UnknownEndpoint { line: usize, id: NodeId },
    #[error("line {line}: edge {from}-{to} conflicts with an earlier record for the same pair")]
    Asymmetric { line: usize, from: NodeId, to: NodeId },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("source and target must differ (both {0})")]
    SameEndpoints(NodeId),
    #[error("cannot place {requested} edges among {nodes} nodes (at most {max})")]
    InfeasibleEdgeCount {
        requested: usize,
        nodes: usize,
        max: usize,
    },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Immutable graph. Participants are kept sorted by id, so the dense index
/// order coincides with id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    participants: Vec<Participant>,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<Vec<(usize, EdgeQoT)>>,
}

fn check_rho(line: usize, rho: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(GraphError::OutOfRange {
            line,
            field: "rho",
            value: rho,
        })
    }
}

fn check_unit_open(line: usize, field: &'static str, value: f64) -> Result<(), GraphError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(GraphError::OutOfRange { line, field, value })
    }
}

impl SocialGraph {
    /// Builds a graph from participants and undirected edge records. Each
    /// edge is installed in both directions. `line` numbers in errors are
    /// the 1-based positions within the supplied slices.
    pub fn from_parts(
        participants: Vec<Participant>,
        edges: &[(NodeId, NodeId, EdgeQoT)],
    ) -> Result<Self, GraphError> {
        let nodes = participants
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i + 1, p))
            .collect::<Vec<_>>();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b, q))| (i + 1, a, b, q))
            .collect::<Vec<_>>();
        Self::build(nodes, edges)
    }

    fn build(
        mut nodes: Vec<(usize, Participant)>,
        edges: Vec<(usize, NodeId, NodeId, EdgeQoT)>,
    ) -> Result<Self, GraphError> {
        for &(line, p) in &nodes {
            check_rho(line, p.rho)?;
        }
        nodes.sort_by_key(|(_, p)| p.id);
        for pair in nodes.windows(2) {
            if pair[0].1.id == pair[1].1.id {
                let line = pair[0].0.max(pair[1].0);
                return Err(GraphError::DuplicateNode {
                    line,
                    id: pair[1].1.id,
                });
            }
        }
        let participants: Vec<Participant> = nodes.into_iter().map(|(_, p)| p).collect();
        let index: HashMap<NodeId, usize> = participants
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id, i))
            .collect();

        let mut pairs: HashMap<(usize, usize), EdgeQoT> = HashMap::new();
        for (line, from, to, q) in edges {
            if from == to {
                return Err(GraphError::SelfLoop { line, id: from });
            }
            check_unit_open(line, "trust", q.trust)?;
            check_unit_open(line, "intimacy", q.intimacy)?;
            let a = *index
                .get(&from)
                .ok_or(GraphError::UnknownEndpoint { line, id: from })?;
            let b = *index
                .get(&to)
                .ok_or(GraphError::UnknownEndpoint { line, id: to })?;
            let key = (a.min(b), a.max(b));
            match pairs.get(&key) {
                Some(prev) if prev != &q => {
                    return Err(GraphError::Asymmetric { line, from, to });
                }
                Some(_) => {}
                None => {
                    pairs.insert(key, q);
                }
            }
        }

        let mut adjacency = vec![Vec::new(); participants.len()];
        for (&(a, b), &q) in &pairs {
            adjacency[a].push((b, q));
            adjacency[b].push((a, q));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(n, _)| n);
        }
        Ok(Self {
            participants,
            index,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.participants.len()
    }

    /// Number of symmetric pairs.
    pub fn edge_count(&self) -> usize {
        self.directed_edge_count() / 2
    }

    pub fn directed_edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn participant(&self, idx: usize) -> Participant {
        self.participants[idx]
    }

    pub fn rho(&self, idx: usize) -> f64 {
        self.participants[idx].rho
    }

    pub fn id_of(&self, idx: usize) -> NodeId {
        self.participants[idx].id
    }

    pub fn index_of(&self, id: NodeId) -> Result<usize, GraphError> {
        self.index.get(&id).copied().ok_or(GraphError::UnknownNode(id))
    }

    /// Neighbors of `idx` in ascending index (= id) order.
    pub fn neighbors(&self, idx: usize) -> &[(usize, EdgeQoT)] {
        &self.adjacency[idx]
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.adjacency[idx].len()
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<EdgeQoT> {
        let list = &self.adjacency[from];
        list.binary_search_by_key(&to, |&(n, _)| n)
            .ok()
            .map(|pos| list[pos].1)
    }

    pub fn edge_by_id(&self, from: NodeId, to: NodeId) -> Result<Option<EdgeQoT>, GraphError> {
        Ok(self.edge(self.index_of(from)?, self.index_of(to)?))
    }

    /// Undirected edges as `(lo, hi, qot)` with `lo < hi`, sorted.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize, EdgeQoT)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, list)| {
            list.iter()
                .filter(move |&&(b, _)| b > a)
                .map(move |&(b, q)| (a, b, q))
        })
    }

    /// Serializes to the line-oriented graph format. Output is canonical:
    /// nodes by id, then edges by `(lo, hi)`.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for p in &self.participants {
            let _ = writeln!(out, "node {} {}", p.id, p.rho);
        }
        for (a, b, q) in self.undirected_edges() {
            let _ = writeln!(
                out,
                "edge {} {} {} {}",
                self.id_of(a),
                self.id_of(b),
                q.trust,
                q.intimacy
            );
        }
        out
    }

    /// Hop distance from every node to `target` (BFS), `None` if unreachable.
    pub fn hop_distances(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[target] = Some(0);
        queue.push_back(target);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap_or(0);
            for &(n, _) in self.neighbors(v) {
                if dist[n].is_none() {
                    dist[n] = Some(dv + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| GraphError::Parse {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

/// Parses a graph document:
///
/// ```text
/// # comment
/// node <id> <rho>
/// edge <from> <to> <trust> <intimacy>
/// ```
pub fn load_graph(document: &str) -> Result<SocialGraph, GraphError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in document.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut toks = text.split_whitespace();
        let kind = toks.next().unwrap_or_default();
        match kind {
            "node" => {
                let id = NodeId(parse_field(line, toks.next(), "node id")?);
                let rho: f64 = parse_field(line, toks.next(), "rho")?;
                nodes.push((line, Participant { id, rho }));
            }
            "edge" => {
                let from = NodeId(parse_field(line, toks.next(), "source id")?);
                let to = NodeId(parse_field(line, toks.next(), "target id")?);
                let trust: f64 = parse_field(line, toks.next(), "trust")?;
                let intimacy: f64 = parse_field(line, toks.next(), "intimacy")?;
                edges.push((line, from, to, EdgeQoT { trust, intimacy }));
            }
            other => {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("unknown record type '{other}'"),
                })
            }
        }
        if let Some(extra) = toks.next() {
            return Err(GraphError::Parse {
                line,
                msg: format!("unexpected trailing token '{extra}'"),
            });
        }
    }
    SocialGraph::build(nodes, edges)
}

/// Uniform sampling range. Trust and intimacy are drawn from `(lo, hi]`,
/// role impact from `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoTDistribution {
    pub trust: UniformRange,
    pub intimacy: UniformRange,
    pub rho: UniformRange,
}

impl Default for QoTDistribution {
    fn default() -> Self {
        Self {
            trust: UniformRange::new(0.0, 1.0),
            intimacy: UniformRange::new(0.0, 1.0),
            rho: UniformRange::new(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub node_count: usize,
    pub edge_count: usize,
    #[serde(default)]
    pub qot: QoTDistribution,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(node_count: usize, edge_count: usize, seed: u64) -> Self {
        Self {
            node_count,
            edge_count,
            qot: QoTDistribution::default(),
            seed,
        }
    }
}

fn max_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(i, j)`, `i < j`,
/// enumerated row by row.
fn pair_from_linear(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Seeded random graph with exactly the requested node and edge counts.
/// Node ids are `1..=node_count`.
pub fn generate_graph(spec: &GeneratorSpec) -> Result<SocialGraph, GraphError> {
    let n = spec.node_count;
    if n == 0 {
        return Err(GraphError::InvalidSpec("node_count must be positive".into()));
    }
    let max = max_pairs(n);
    if spec.edge_count > max {
        return Err(GraphError::InfeasibleEdgeCount {
            requested: spec.edge_count,
            nodes: n,
            max,
        });
    }
    let d = &spec.qot;
    for (name, r, upper_closed) in [
        ("trust", d.trust, true),
        ("intimacy", d.intimacy, true),
        ("rho", d.rho, false),
    ] {
        let ok = r.lo >= 0.0 && r.hi <= 1.0 && (r.lo < r.hi || (!upper_closed && r.lo == r.hi));
        if !ok {
            return Err(GraphError::InvalidSpec(format!(
                "{name} range [{}, {}] must satisfy 0 <= lo < hi <= 1",
                r.lo, r.hi
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let participants: Vec<Participant> = (0..n)
        .map(|i| {
            let u: f64 = rng.gen();
            Participant {
                id: NodeId(i as u64 + 1),
                rho: d.rho.lo + (d.rho.hi - d.rho.lo) * u,
            }
        })
        .collect();

    let mut chosen = index::sample(&mut rng, max, spec.edge_count).into_vec();
    chosen.sort_unstable();
    let mut edges = Vec::with_capacity(chosen.len());
    for k in chosen {
        let (a, b) = pair_from_linear(k, n);
        let ut: f64 = rng.gen();
        let ur: f64 = rng.gen();
        let q = EdgeQoT {
            trust: d.trust.hi - (d.trust.hi - d.trust.lo) * ut,
            intimacy: d.intimacy.hi - (d.intimacy.hi - d.intimacy.lo) * ur,
        };
        edges.push((participants[a].id, participants[b].id, q));
    }
    SocialGraph::from_parts(participants, &edges)
}

/// Hop-bounded region between a source and a target. Holds only the nodes
/// and edges lying on at least one simple source-target path of at most
/// `max_hops` edges; node indices refer to the restricted graph.
#[derive(Debug, Clone)]
pub struct SubNetwork {
    graph: SocialGraph,
    source: usize,
    target: usize,
    source_id: NodeId,
    target_id: NodeId,
    max_hops: usize,
}

impl SubNetwork {
    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn source_id(&self) -> NodeId {
        self.source_id
    }

    pub fn target_id(&self) -> NodeId {
        self.target_id
    }

    pub fn max_hops(&self) -> usize {
        self.max_hops
    }

    /// True when no qualifying path exists.
    pub fn is_empty(&self) -> bool {
        self.graph.node_count() == 0
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }
}

/// Restricts `g` to the nodes and edges that lie on some simple `s -> d`
/// path with at most `max_hops` edges.
///
/// Depth-bounded DFS from `s`, pruned by BFS hop distances to `d`; every
/// time `d` is reached the stack is marked.
pub fn extract_subnetwork(
    g: &SocialGraph,
    s: NodeId,
    d: NodeId,
    max_hops: usize,
) -> Result<SubNetwork, GraphError> {
    let src = g.index_of(s)?;
    let dst = g.index_of(d)?;
    if src == dst {
        return Err(GraphError::SameEndpoints(s));
    }
    let dist = g.hop_distances(dst);
    let n = g.node_count();
    let mut node_used = vec![false; n];
    let mut edge_used: HashMap<(usize, usize), ()> = HashMap::new();
    let mut on_path = vec![false; n];
    let mut stack = vec![src];
    on_path[src] = true;

    fn dfs(
        g: &SocialGraph,
        dst: usize,
        max_hops: usize,
        dist: &[Option<usize>],
        stack: &mut Vec<usize>,
        on_path: &mut [bool],
        node_used: &mut [bool],
        edge_used: &mut HashMap<(usize, usize), ()>,
    ) {
        let v = *stack.last().expect("stack holds the source");
        let hops = stack.len() - 1;
        for &(x, _) in g.neighbors(v) {
            if on_path[x] {
                continue;
            }
            match dist[x] {
                Some(dx) if hops + 1 + dx <= max_hops => {}
                _ => continue,
            }
            if x == dst {
                for w in stack.windows(2) {
                    edge_used.insert((w[0].min(w[1]), w[0].max(w[1])), ());
                }
                for &u in stack.iter() {
                    node_used[u] = true;
                }
                node_used[dst] = true;
                edge_used.insert((v.min(dst), v.max(dst)), ());
                continue;
            }
            stack.push(x);
            on_path[x] = true;
            dfs(g, dst, max_hops, dist, stack, on_path, node_used, edge_used);
            on_path[x] = false;
            stack.pop();
        }
    }

    if max_hops >= 1 {
        dfs(
            g,
            dst,
            max_hops,
            &dist,
            &mut stack,
            &mut on_path,
            &mut node_used,
            &mut edge_used,
        );
    }

    let participants: Vec<Participant> = (0..n)
        .filter(|&i| node_used[i])
        .map(|i| g.participant(i))
        .collect();
    let mut edges: Vec<(NodeId, NodeId, EdgeQoT)> = edge_used
        .keys()
        .map(|&(a, b)| {
            let q = g.edge(a, b).expect("marked edge exists");
            (g.id_of(a), g.id_of(b), q)
        })
        .collect();
    edges.sort_by_key(|&(a, b, _)| (a, b));
    let graph = SocialGraph::from_parts(participants, &edges)
        .expect("restriction of a valid graph is valid");
    let (source, target) = if graph.node_count() == 0 {
        (0, 0)
    } else {
        (
            graph.index_of(s).expect("source kept"),
            graph.index_of(d).expect("target kept"),
        )
    };
    Ok(SubNetwork {
        graph,
        source,
        target,
        source_id: s,
        target_id: d,
        max_hops,
    })
}

/// Score used to rank neighbors for static neighborhood pruning.
pub fn single_edge_score(q: EdgeQoT, neighbor_rho: f64, w: &QoTWeights) -> f64 {
    w.trust * q.trust + w.intimacy * q.intimacy + w.rho * neighbor_rho
}

/// The `m` best neighbors of `v` by single-edge utility contribution,
/// descending, ties by lower index.
pub fn neighbors_pruned_idx(g: &SocialGraph, v: usize, m: usize, w: &QoTWeights) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = g
        .neighbors(v)
        .iter()
        .map(|&(n, q)| (single_edge_score(q, g.rho(n), w), n))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.truncate(m);
    scored.into_iter().map(|(_, n)| n).collect()
}

pub fn neighbors_pruned(
    g: &SocialGraph,
    v: NodeId,
    m: usize,
    w: &QoTWeights,
) -> Result<Vec<NodeId>, GraphError> {
    let idx = g.index_of(v)?;
    Ok(neighbors_pruned_idx(g, idx, m, w)
        .into_iter()
        .map(|i| g.id_of(i))
        .collect())
}
