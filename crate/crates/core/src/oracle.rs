//! Exhaustive ground truth: enumerates every simple hop-bounded path and
//! picks the best feasible one.

use thiserror::Error;

use crate::graph::SubNetwork;
use crate::outcome::OptResult;
use crate::qot::{aggregate, is_feasible, utility, QoTConstraints, QoTWeights, TrustPath};

pub const DEFAULT_PATH_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("path enumeration exceeded the cap of {0} paths")]
    TooManyPaths(usize),
}

/// All simple source-target paths of at most `max_hops` edges, in
/// lexicographic order of their node sequences.
pub fn enumerate_paths(sub: &SubNetwork) -> Result<Vec<TrustPath>, OracleError> {
    enumerate_paths_capped(sub, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_capped(sub: &SubNetwork, cap: usize) -> Result<Vec<TrustPath>, OracleError> {
    let mut out = Vec::new();
    if sub.is_empty() {
        return Ok(out);
    }
    let g = sub.graph();
    let dist = g.hop_distances(sub.target());
    let mut on_path = vec![false; g.node_count()];
    let mut stack = vec![sub.source()];
    on_path[sub.source()] = true;
    // Explicit DFS over (node, next neighbor position).
    let mut cursor = vec![0usize];
    while let Some(&v) = stack.last() {
        let pos = cursor.last_mut().expect("cursor tracks stack");
        let nbrs = g.neighbors(v);
        if *pos >= nbrs.len() {
            on_path[v] = false;
            stack.pop();
            cursor.pop();
            continue;
        }
        let x = nbrs[*pos].0;
        *pos += 1;
        let hops = stack.len();
        if on_path[x] || dist[x].is_none_or(|dx| hops + dx > sub.max_hops()) {
            continue;
        }
        if x == sub.target() {
            if out.len() == cap {
                return Err(OracleError::TooManyPaths(cap));
            }
            let mut nodes = stack.clone();
            nodes.push(x);
            out.push(TrustPath::from_nodes_unchecked(nodes));
            continue;
        }
        on_path[x] = true;
        stack.push(x);
        cursor.push(0);
    }
    Ok(out)
}

/// Maximum-utility feasible path. Ties go to fewer hops, then to the
/// lexicographically smaller node sequence.
pub fn optimal_path(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
) -> Result<OptResult, OracleError> {
    optimal_path_capped(sub, w, c, DEFAULT_PATH_CAP)
}

pub fn optimal_path_capped(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    cap: usize,
) -> Result<OptResult, OracleError> {
    let paths = enumerate_paths_capped(sub, cap)?;
    if paths.is_empty() {
        return Ok(OptResult::no_path());
    }
    let mut best: Option<(f64, TrustPath)> = None;
    for p in paths {
        let q = aggregate(&p, sub).expect("enumerated paths are valid");
        if !is_feasible(&q, c) {
            continue;
        }
        let u = utility(&q, w);
        let better = match &best {
            None => true,
            Some((bu, bp)) => u > *bu || (u == *bu && p.hops() < bp.hops()),
        };
        if better {
            best = Some((u, p));
        }
    }
    Ok(match best {
        Some((u, p)) => OptResult::found(p, u),
        None => OptResult::infeasible(),
    })
}
