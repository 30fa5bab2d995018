#![allow(dead_code)]

use ostp_core::graph::{extract_subnetwork, generate_graph, load_graph, GeneratorSpec, NodeId, SocialGraph, SubNetwork};
use ostp_core::oracle::optimal_path;
use ostp_core::outcome::{derive_seed, OptResult};
use ostp_core::qot::{QoTConstraints, QoTWeights};

pub fn weights() -> QoTWeights {
    QoTWeights::new(0.3, 0.3, 0.4).unwrap()
}

pub fn constraints() -> QoTConstraints {
    QoTConstraints::new(0.05, 0.001, 0.3).unwrap()
}

/// The four-node diamond 1-2-4 / 1-3-4 with fixed QoT values.
pub fn diamond() -> SocialGraph {
    load_graph(
        "node 1 0.5\nnode 2 0.9\nnode 3 0.2\nnode 4 0.5\n\
         edge 1 2 0.6 0.4\nedge 2 4 0.6 0.4\nedge 1 3 0.9 0.8\nedge 3 4 0.9 0.8\n",
    )
    .unwrap()
}

pub struct Instance {
    pub seed: u64,
    pub graph: SocialGraph,
    pub sub: SubNetwork,
    pub oracle: OptResult,
}

/// Seeded 10-node, 20-edge instances between nodes 1 and 10 whose
/// subnetwork holds at least one feasible path.
pub fn ten_node_instances(count: usize, base: u64) -> Vec<Instance> {
    let (w, c) = (weights(), constraints());
    let mut out = Vec::new();
    let mut k = 0u64;
    while out.len() < count {
        let seed = derive_seed(base, k);
        k += 1;
        let graph = generate_graph(&GeneratorSpec::new(10, 20, seed)).unwrap();
        let sub = extract_subnetwork(&graph, NodeId(1), NodeId(10), 6).unwrap();
        if sub.is_empty() {
            continue;
        }
        let oracle = optimal_path(&sub, &w, &c).unwrap();
        if oracle.utility.is_none() {
            continue;
        }
        out.push(Instance { seed, graph, sub, oracle });
    }
    out
}

/// Instance on which the single-label backward pass picks the wrong local
/// path at `v`: through `b` it looks better to the target, but only the
/// route through `a` stays feasible once the weak first edge is added.
pub fn heuristic_trap() -> SocialGraph {
    load_graph(
        "# s=1 v=2 a=3 b=4 d=5\n\
         node 1 0.5\nnode 2 1.0\nnode 3 0.2\nnode 4 0.9\nnode 5 0.5\n\
         edge 1 2 0.1 1.0\n\
         edge 2 3 0.9 1.0\nedge 3 5 0.9 1.0\n\
         edge 2 4 0.5 1.0\nedge 4 5 0.5 1.0\n",
    )
    .unwrap()
}

pub fn approx_eq(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        (None, None) => true,
        _ => false,
    }
}
