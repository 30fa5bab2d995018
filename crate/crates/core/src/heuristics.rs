//! Heuristic baselines.
//!
//! * MFPB_HOSTP: a backward Dijkstra-style pass records, for every node,
//!   the minimum-`delta` local path to the target. A forward max-utility
//!   pass then grows a partial path from the source and checks each
//!   candidate's foreseen path (forward part + recorded backward part);
//!   an infeasible foreseen path deletes the link and restarts the search.
//! * H_MCOP-style search: the same backward pass with `g_lambda` as the
//!   cost, then a look-ahead forward pass that keeps the best feasible
//!   foreseen completion.
//!
//! Neither aggregate is edge-additive, so labels hold the node sequence and
//! the cost is recomputed from the aggregated QoT at every relaxation. One
//! label is kept per node.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::graph::SubNetwork;
use crate::outcome::{OptResult, SolveOutcome, SolverId};
use crate::qot::{
    aggregate_with, delta, g_lambda, is_feasible, utility, QoTConstraints, QoTVector, QoTWeights,
    TrustPath,
};

/// Backward label of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardEntry {
    /// Path cost (`delta` for MFPB_HOSTP, `g_lambda` for H_MCOP).
    pub best_delta: f64,
    pub qot_to_target: QoTVector,
    /// `None` only for the target itself.
    pub next_hop: Option<usize>,
    pub hops: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardTable {
    target: usize,
    entries: Vec<Option<BackwardEntry>>,
}

impl BackwardTable {
    pub fn entry(&self, v: usize) -> Option<&BackwardEntry> {
        self.entries.get(v).and_then(Option::as_ref)
    }

    pub fn reached(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|_| i))
    }

    /// Node sequence `v, next_hop(v), ..., target`.
    pub fn backward_path(&self, v: usize) -> Option<Vec<usize>> {
        let mut cur = v;
        let mut out = vec![v];
        loop {
            let e = self.entry(cur)?;
            match e.next_hop {
                None => return Some(out),
                Some(n) => {
                    if out.len() > self.entries.len() {
                        return None;
                    }
                    out.push(n);
                    cur = n;
                }
            }
        }
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MinKey(f64, usize);

impl Eq for MinKey {}

impl Ord for MinKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn aggregate_nodes(sub: &SubNetwork, nodes: &[usize]) -> QoTVector {
    let g = sub.graph();
    aggregate_with(nodes, |a, b| g.edge(a, b), |v| g.rho(v)).expect("nodes form a path")
}

fn backward_with<F>(sub: &SubNetwork, cost: F) -> BackwardTable
where
    F: Fn(&QoTVector) -> f64,
{
    let n = sub.node_count();
    let mut entries: Vec<Option<BackwardEntry>> = vec![None; n];
    if sub.is_empty() {
        return BackwardTable {
            target: 0,
            entries,
        };
    }
    let g = sub.graph();
    let target = sub.target();
    let mut settled = vec![false; n];
    let mut paths: Vec<Vec<usize>> = vec![Vec::new(); n];
    entries[target] = Some(BackwardEntry {
        best_delta: 0.0,
        qot_to_target: QoTVector::PERFECT,
        next_hop: None,
        hops: 0,
    });
    paths[target] = vec![target];
    let mut heap = BinaryHeap::new();
    heap.push(MinKey(0.0, target));

    while let Some(MinKey(_, v)) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        let hops_v = entries[v].as_ref().map_or(0, |e| e.hops);
        if hops_v >= sub.max_hops() {
            continue;
        }
        for &(u, _) in g.neighbors(v) {
            if settled[u] {
                continue;
            }
            let mut nodes = Vec::with_capacity(paths[v].len() + 1);
            nodes.push(u);
            nodes.extend_from_slice(&paths[v]);
            let q = aggregate_nodes(sub, &nodes);
            let c = cost(&q);
            let improves = entries[u].as_ref().is_none_or(|e| c < e.best_delta);
            if improves {
                entries[u] = Some(BackwardEntry {
                    best_delta: c,
                    qot_to_target: q,
                    next_hop: Some(v),
                    hops: hops_v + 1,
                });
                paths[u] = nodes;
                heap.push(MinKey(c, u));
            }
        }
    }
    BackwardTable { target, entries }
}

/// Minimum-`delta` backward local paths from every reachable node.
pub fn backward_search(sub: &SubNetwork, c: &QoTConstraints) -> BackwardTable {
    backward_with(sub, |q| delta(q, c))
}

/// Foreseen path: forward nodes up to and including `x`, then the recorded
/// backward path of `x`. `None` if `x` has no backward label or the
/// concatenation is not a simple path within the hop budget.
fn foreseen(
    sub: &SubNetwork,
    table: &BackwardTable,
    forward: &[usize],
    x: usize,
) -> Option<Vec<usize>> {
    let mut nodes = forward.to_vec();
    nodes.push(x);
    if x != sub.target() {
        let back = table.backward_path(x)?;
        let mut seen: HashSet<usize> = forward.iter().copied().collect();
        for &b in &back {
            if !seen.insert(b) {
                return None;
            }
        }
        nodes.extend_from_slice(&back[1..]);
    }
    if nodes.len() - 1 > sub.max_hops() {
        return None;
    }
    Some(nodes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MaxKey(f64, usize);

impl Eq for MaxKey {}

impl Ord for MaxKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for MaxKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Forward max-utility search with foreseen-path pruning. Returns the result
/// and the number of restarts caused by link deletions.
pub fn forward_search(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    table: &BackwardTable,
) -> (OptResult, u64) {
    if sub.is_empty() {
        return (OptResult::no_path(), 0);
    }
    let g = sub.graph();
    let (s, d) = (sub.source(), sub.target());
    let n = sub.node_count();
    let mut removed: HashSet<(usize, usize)> = HashSet::new();
    let mut restarts = 0u64;

    'restart: loop {
        let mut labels: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        labels[s] = Some((f64::INFINITY, vec![s]));
        heap.push(MaxKey(f64::INFINITY, s));

        while let Some(MaxKey(_, m)) = heap.pop() {
            if settled[m] {
                continue;
            }
            settled[m] = true;
            let path_m = labels[m].as_ref().expect("pushed nodes are labelled").1.clone();
            if m == d {
                let q = aggregate_nodes(sub, &path_m);
                debug_assert!(is_feasible(&q, c));
                let u = utility(&q, w);
                return (OptResult::found(TrustPath::from_nodes_unchecked(path_m), u), restarts);
            }
            if path_m.len() > sub.max_hops() {
                continue;
            }
            for &(x, _) in g.neighbors(m) {
                if settled[x] || removed.contains(&(m, x)) || path_m.contains(&x) {
                    continue;
                }
                let Some(full) = foreseen(sub, table, &path_m, x) else {
                    continue;
                };
                if !is_feasible(&aggregate_nodes(sub, &full), c) {
                    removed.insert((m, x));
                    restarts += 1;
                    continue 'restart;
                }
                let mut fwd = path_m.clone();
                fwd.push(x);
                let partial = utility(&aggregate_nodes(sub, &fwd), w);
                let better = labels[x].as_ref().is_none_or(|(u, _)| partial > *u);
                if better {
                    labels[x] = Some((partial, fwd));
                    heap.push(MaxKey(partial, x));
                }
            }
        }
        return (OptResult::infeasible(), restarts);
    }
}

/// Backward pass, feasibility gate on the source's `delta`, forward pass.
pub fn mfpb_hostp(sub: &SubNetwork, w: &QoTWeights, c: &QoTConstraints) -> OptResult {
    mfpb_hostp_outcome(sub, w, c).result
}

pub fn mfpb_hostp_outcome(sub: &SubNetwork, w: &QoTWeights, c: &QoTConstraints) -> SolveOutcome {
    if sub.is_empty() {
        return SolveOutcome::new(SolverId::Mfpb, OptResult::no_path());
    }
    let table = backward_search(sub, c);
    let gate = table.entry(sub.source()).map(|e| e.best_delta);
    let (result, restarts) = match gate {
        Some(d) if d <= 1.0 => forward_search(sub, w, c, &table),
        _ => (OptResult::infeasible(), 0),
    };
    let mut out = SolveOutcome::new(SolverId::Mfpb, result);
    out.steps_executed = restarts + 1;
    out
}

/// H_MCOP-style two-pass search.
pub fn h_mcop(sub: &SubNetwork, w: &QoTWeights, c: &QoTConstraints, lambda: f64) -> OptResult {
    h_mcop_outcome(sub, w, c, lambda).result
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LookAhead {
    Feasible(f64),
    Infeasible(f64),
}

impl LookAhead {
    fn rank(&self) -> (u8, f64) {
        match *self {
            LookAhead::Feasible(u) => (1, u),
            LookAhead::Infeasible(g) => (0, -g),
        }
    }

    fn better_than(&self, other: &Self) -> bool {
        let (a, b) = (self.rank(), other.rank());
        a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LookKey(u8, f64, usize);

impl Eq for LookKey {}

impl Ord for LookKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .cmp(&other.0)
            .then(self.1.total_cmp(&other.1))
            .then(other.2.cmp(&self.2))
    }
}

impl PartialOrd for LookKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn h_mcop_outcome(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    lambda: f64,
) -> SolveOutcome {
    assert!(lambda >= 1.0, "lambda must be >= 1");
    if sub.is_empty() {
        return SolveOutcome::new(SolverId::Hmcop, OptResult::no_path());
    }
    let table = backward_with(sub, |q| g_lambda(q, c, lambda));
    let (s, d) = (sub.source(), sub.target());
    let probe = table
        .entry(s)
        .map(|e| g_lambda(&e.qot_to_target, c, 1.0));
    let mut out = SolveOutcome::new(SolverId::Hmcop, OptResult::infeasible());
    out.steps_executed = 1;
    match probe {
        Some(g1) if g1 <= 3.0 => {}
        _ => return out,
    }

    let g = sub.graph();
    let n = sub.node_count();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut consider = |nodes: &[usize], u: f64| {
        let better = best
            .as_ref()
            .is_none_or(|(bu, bp)| u > *bu || (u == *bu && nodes.len() < bp.len()));
        if better {
            best = Some((u, nodes.to_vec()));
        }
    };

    let mut labels: Vec<Option<(LookAhead, Vec<usize>)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    labels[s] = Some((LookAhead::Feasible(f64::INFINITY), vec![s]));
    heap.push(LookKey(1, f64::INFINITY, s));
    while let Some(LookKey(_, _, m)) = heap.pop() {
        if settled[m] {
            continue;
        }
        settled[m] = true;
        let path_m = labels[m].as_ref().expect("labelled").1.clone();
        if m == d || path_m.len() > sub.max_hops() {
            continue;
        }
        for &(x, _) in g.neighbors(m) {
            if settled[x] || path_m.contains(&x) {
                continue;
            }
            let Some(full) = foreseen(sub, &table, &path_m, x) else {
                continue;
            };
            let q = aggregate_nodes(sub, &full);
            let look = if is_feasible(&q, c) {
                let u = utility(&q, w);
                consider(&full, u);
                LookAhead::Feasible(u)
            } else {
                LookAhead::Infeasible(g_lambda(&q, c, lambda))
            };
            let better = labels[x].as_ref().is_none_or(|(l, _)| look.better_than(l));
            if better {
                let mut fwd = path_m.clone();
                fwd.push(x);
                let (tier, key) = look.rank();
                labels[x] = Some((look, fwd));
                heap.push(LookKey(tier, key, x));
            }
        }
    }
    if let Some((u, nodes)) = best {
        out.result = OptResult::found(TrustPath::from_nodes_unchecked(nodes), u);
    }
    out
}
