//! Search space shared by the annealers: indexed subnetwork topology,
//! pruned neighborhoods, the plus-minus move and random initial paths.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{neighbors_pruned_idx, EdgeQoT, SubNetwork};
use crate::qot::{aggregate_with, QoTError, QoTVector, QoTWeights, TrustPath};

/// Precomputed view of a non-empty subnetwork. Each symmetric edge pair
/// owns one slot; slots are numbered in `(lo, hi)` order.
#[derive(Debug, Clone)]
pub struct PathSpace {
    source: usize,
    target: usize,
    max_hops: usize,
    adjacency: Vec<Vec<(usize, usize)>>,
    edges: Vec<(usize, usize)>,
    edge_qot: Vec<EdgeQoT>,
    rho: Vec<f64>,
    pruned: Vec<Vec<usize>>,
    dist_to_target: Vec<usize>,
    /// `slot + 1` per ordered node pair, `0` for no edge; only for small
    /// subnetworks.
    dense: Option<Vec<u32>>,
}

const DENSE_LIMIT: usize = 2048;

impl PathSpace {
    /// `prune` is the per-node neighborhood size `M`.
    pub fn new(sub: &SubNetwork, prune: usize, w: &QoTWeights) -> Self {
        let g = sub.graph();
        let n = g.node_count();
        let mut edges = Vec::new();
        let mut edge_qot = Vec::new();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (a, b, q) in g.undirected_edges() {
            let slot = edges.len();
            edges.push((a, b));
            edge_qot.push(q);
            adjacency[a].push((b, slot));
            adjacency[b].push((a, slot));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let dist_to_target = if n == 0 {
            Vec::new()
        } else {
            g.hop_distances(sub.target())
                .into_iter()
                .map(|d| d.unwrap_or(usize::MAX))
                .collect()
        };
        let dense = (n <= DENSE_LIMIT).then(|| {
            let mut m = vec![0u32; n * n];
            for (slot, &(a, b)) in edges.iter().enumerate() {
                m[a * n + b] = slot as u32 + 1;
                m[b * n + a] = slot as u32 + 1;
            }
            m
        });
        Self {
            dense,
            source: sub.source(),
            target: sub.target(),
            max_hops: sub.max_hops(),
            rho: (0..n).map(|i| g.rho(i)).collect(),
            pruned: (0..n).map(|v| neighbors_pruned_idx(g, v, prune, w)).collect(),
            adjacency,
            edges,
            edge_qot,
            dist_to_target,
        }
    }

    pub fn node_count(&self) -> usize {
        self.rho.len()
    }

    /// Number of spin slots `K`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn max_hops(&self) -> usize {
        self.max_hops
    }

    pub fn edge_endpoints(&self, slot: usize) -> (usize, usize) {
        self.edges[slot]
    }

    pub fn slot(&self, a: usize, b: usize) -> Option<usize> {
        if let Some(m) = &self.dense {
            let n = self.rho.len();
            if a >= n || b >= n {
                return None;
            }
            return m[a * n + b].checked_sub(1).map(|s| s as usize);
        }
        let list = self.adjacency.get(a)?;
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| list[pos].1)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.slot(a, b).is_some()
    }

    pub fn aggregate(&self, nodes: &[usize]) -> Result<QoTVector, QoTError> {
        aggregate_with(
            nodes,
            |a, b| self.slot(a, b).map(|s| self.edge_qot[s]),
            |v| self.rho[v],
        )
    }

    pub fn pruned_neighbors(&self, v: usize) -> &[usize] {
        &self.pruned[v]
    }

    /// Checks every path invariant against this space.
    pub fn is_valid(&self, nodes: &[usize]) -> bool {
        if nodes.len() < 2
            || nodes[0] != self.source
            || *nodes.last().unwrap() != self.target
            || nodes.len() - 1 > self.max_hops
        {
            return false;
        }
        for (i, v) in nodes.iter().enumerate() {
            if nodes[..i].contains(v) {
                return false;
            }
        }
        nodes.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    /// Random valid path by a depth-bounded randomized walk from the source
    /// that backtracks on dead ends. `None` only if no path exists.
    pub fn random_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<TrustPath> {
        if self.node_count() == 0 {
            return None;
        }
        self.complete_randomly(vec![self.source], usize::MAX, rng)
            .map(TrustPath::from_nodes_unchecked)
    }

    /// Extends `path` to the target with a randomized depth-first walk
    /// that keeps `path` itself fixed. Gives up after `expansions` visits.
    fn complete_randomly<R: Rng + ?Sized>(
        &self,
        mut path: Vec<usize>,
        expansions: usize,
        rng: &mut R,
    ) -> Option<Vec<usize>> {
        let floor = path.len();
        let mut budget = expansions;
        let mut frontier: Vec<Vec<usize>> = vec![self.walk_candidates(&path, rng)];
        while let Some(cands) = frontier.last_mut() {
            match cands.pop() {
                Some(x) if x == self.target => {
                    path.push(x);
                    return Some(path);
                }
                Some(x) => {
                    if budget == 0 {
                        return None;
                    }
                    budget -= 1;
                    path.push(x);
                    let next = self.walk_candidates(&path, rng);
                    frontier.push(next);
                }
                None => {
                    frontier.pop();
                    if path.len() > floor {
                        path.pop();
                    }
                }
            }
        }
        None
    }

    fn walk_candidates<R: Rng + ?Sized>(&self, path: &[usize], rng: &mut R) -> Vec<usize> {
        let v = *path.last().unwrap();
        let hops = path.len() - 1;
        let mut c: Vec<usize> = self.adjacency[v]
            .iter()
            .map(|&(x, _)| x)
            .filter(|x| !path.contains(x))
            .filter(|&x| {
                let d = self.dist_to_target[x];
                d != usize::MAX && hops + 1 + d <= self.max_hops
            })
            .collect();
        c.shuffle(rng);
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Substitute,
    Minus,
    Plus,
    /// Keeps a random prefix and walks a fresh tail to the target. Lets
    /// the path length change where no triangle exists.
    Reroute,
}

const ORDER: [MoveKind; 4] = [MoveKind::Substitute, MoveKind::Minus, MoveKind::Plus, MoveKind::Reroute];

const REROUTE_EXPANSIONS: usize = 64;

/// Picks uniformly among positions with at least one candidate, then
/// uniformly among that position's candidates.
fn pick_position<R, C, I>(positions: std::ops::Range<usize>, candidates: C, rng: &mut R) -> Option<(usize, usize)>
where
    R: Rng + ?Sized,
    C: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let open = positions.clone().filter(|&i| candidates(i).next().is_some()).count();
    if open == 0 {
        return None;
    }
    let i = positions
        .filter(|&i| candidates(i).next().is_some())
        .nth(rng.gen_range(0..open))?;
    let n = candidates(i).count();
    let c = candidates(i).nth(rng.gen_range(0..n))?;
    Some((i, c))
}

/// Pruned neighbors of `a` off the path that also link to `b`.
fn bridges<'a>(nodes: &'a [usize], space: &'a PathSpace, a: usize, b: usize) -> impl Iterator<Item = usize> + 'a {
    space
        .pruned_neighbors(a)
        .iter()
        .copied()
        .filter(move |c| !nodes.contains(c) && space.has_edge(*c, b))
}

fn try_substitute<R: Rng + ?Sized>(nodes: &[usize], space: &PathSpace, rng: &mut R) -> Option<Vec<usize>> {
    let cands = |i: usize| bridges(nodes, space, nodes[i - 1], nodes[i + 1]);
    let (i, c) = pick_position(1..nodes.len().saturating_sub(1), cands, rng)?;
    let mut out = nodes.to_vec();
    out[i] = c;
    Some(out)
}

fn try_minus<R: Rng + ?Sized>(nodes: &[usize], space: &PathSpace, rng: &mut R) -> Option<Vec<usize>> {
    let bypass = |i: &usize| space.has_edge(nodes[i - 1], nodes[i + 1]);
    let inner = 1..nodes.len().saturating_sub(1);
    let open = inner.clone().filter(bypass).count();
    if open == 0 {
        return None;
    }
    let i = inner.filter(bypass).nth(rng.gen_range(0..open))?;
    let mut out = nodes.to_vec();
    out.remove(i);
    Some(out)
}

fn try_plus<R: Rng + ?Sized>(nodes: &[usize], space: &PathSpace, rng: &mut R) -> Option<Vec<usize>> {
    if nodes.len() > space.max_hops() {
        return None;
    }
    let cands = |i: usize| bridges(nodes, space, nodes[i], nodes[i + 1]);
    let (i, c) = pick_position(0..nodes.len() - 1, cands, rng)?;
    let mut out = Vec::with_capacity(nodes.len() + 1);
    out.extend_from_slice(&nodes[..=i]);
    out.push(c);
    out.extend_from_slice(&nodes[i + 1..]);
    Some(out)
}

pub fn apply_kind<R: Rng + ?Sized>(
    kind: MoveKind,
    path: &TrustPath,
    space: &PathSpace,
    rng: &mut R,
) -> Option<TrustPath> {
    let nodes = path.nodes();
    match kind {
        MoveKind::Substitute => try_substitute(nodes, space, rng),
        MoveKind::Minus => try_minus(nodes, space, rng),
        MoveKind::Plus => try_plus(nodes, space, rng),
        MoveKind::Reroute => {
            let i = rng.gen_range(0..nodes.len() - 1);
            space
                .complete_randomly(nodes[..=i].to_vec(), REROUTE_EXPANSIONS, rng)
                .filter(|p| p != nodes)
        }
    }
    .map(TrustPath::from_nodes_unchecked)
}

/// Plus-minus neighbor of `path`. Draws one of substitute, minus, plus and
/// reroute uniformly; if it has no legal realization the next one in that
/// fixed order is tried. Returns the input unchanged when nothing applies.
pub fn propose_move<R: Rng + ?Sized>(path: &TrustPath, space: &PathSpace, rng: &mut R) -> TrustPath {
    let start = rng.gen_range(0..ORDER.len());
    for k in 0..ORDER.len() {
        if let Some(p) = apply_kind(ORDER[(start + k) % ORDER.len()], path, space, rng) {
            return p;
        }
    }
    path.clone()
}
