//! Quality-of-trust aggregation along a path and the scalar measures built
//! on it: utility, the max-deficiency objective, the power-sum aggregate and
//! feasibility.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeQoT, NodeId, SubNetwork};

/// Tolerance on `w_T + w_r + w_rho = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QoTError {
    #[error("weights must lie in [0, 1] and sum to 1 (got {0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
    #[error("constraints must lie in [0, 1) (got {0}, {1}, {2})")]
    InvalidConstraints(f64, f64, f64),
    #[error("path must contain at least two nodes")]
    TooShort,
    #[error("path repeats node index {0}")]
    NotSimple(usize),
    #[error("path has {hops} hops, budget is {max_hops}")]
    TooLong { hops: usize, max_hops: usize },
    #[error("path does not run from source to target")]
    WrongEndpoints,
    #[error("no edge between node indices {0} and {1}")]
    MissingEdge(usize, usize),
}

/// Aggregated QoT of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoTVector {
    pub trust: f64,
    pub intimacy: f64,
    pub rho: f64,
}

impl QoTVector {
    pub const PERFECT: QoTVector = QoTVector {
        trust: 1.0,
        intimacy: 1.0,
        rho: 1.0,
    };

    pub fn new(trust: f64, intimacy: f64, rho: f64) -> Self {
        Self {
            trust,
            intimacy,
            rho,
        }
    }

    fn components(&self) -> [f64; 3] {
        [self.trust, self.intimacy, self.rho]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct QoTWeights {
    pub trust: f64,
    pub intimacy: f64,
    pub rho: f64,
}

impl QoTWeights {
    pub fn new(trust: f64, intimacy: f64, rho: f64) -> Result<Self, QoTError> {
        let in_unit = [trust, intimacy, rho]
            .iter()
            .all(|w| (0.0..=1.0).contains(w));
        if !in_unit || ((trust + intimacy + rho) - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(QoTError::InvalidWeights(trust, intimacy, rho));
        }
        Ok(Self {
            trust,
            intimacy,
            rho,
        })
    }
}

impl TryFrom<[f64; 3]> for QoTWeights {
    type Error = QoTError;
    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<QoTWeights> for [f64; 3] {
    fn from(w: QoTWeights) -> Self {
        [w.trust, w.intimacy, w.rho]
    }
}

/// Lower bounds on the aggregated QoT. Each bound is strictly below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct QoTConstraints {
    pub trust: f64,
    pub intimacy: f64,
    pub rho: f64,
}

impl QoTConstraints {
    pub fn new(trust: f64, intimacy: f64, rho: f64) -> Result<Self, QoTError> {
        if [trust, intimacy, rho].iter().all(|c| (0.0..1.0).contains(c)) {
            Ok(Self {
                trust,
                intimacy,
                rho,
            })
        } else {
            Err(QoTError::InvalidConstraints(trust, intimacy, rho))
        }
    }

    fn components(&self) -> [f64; 3] {
        [self.trust, self.intimacy, self.rho]
    }
}

impl TryFrom<[f64; 3]> for QoTConstraints {
    type Error = QoTError;
    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<QoTConstraints> for [f64; 3] {
    fn from(c: QoTConstraints) -> Self {
        [c.trust, c.intimacy, c.rho]
    }
}

/// Simple source-to-target node sequence, as dense indices into a
/// [`SubNetwork`]'s graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrustPath {
    nodes: Vec<usize>,
}

impl TrustPath {
    /// Wraps a node sequence without validation.
    pub fn from_nodes_unchecked(nodes: Vec<usize>) -> Self {
        Self { nodes }
    }

    /// Validates against every path invariant.
    pub fn new(nodes: Vec<usize>, sub: &SubNetwork) -> Result<Self, QoTError> {
        let p = Self { nodes };
        p.validate(sub)?;
        Ok(p)
    }

    pub fn from_ids(ids: &[NodeId], sub: &SubNetwork) -> Result<Self, QoTError> {
        let g = sub.graph();
        let mut nodes = Vec::with_capacity(ids.len());
        for &id in ids {
            nodes.push(g.index_of(id).map_err(|_| QoTError::WrongEndpoints)?);
        }
        Self::new(nodes, sub)
    }

    pub fn validate(&self, sub: &SubNetwork) -> Result<(), QoTError> {
        let n = &self.nodes;
        if n.len() < 2 {
            return Err(QoTError::TooShort);
        }
        if sub.is_empty() || n[0] != sub.source() || *n.last().unwrap() != sub.target() {
            return Err(QoTError::WrongEndpoints);
        }
        if self.hops() > sub.max_hops() {
            return Err(QoTError::TooLong {
                hops: self.hops(),
                max_hops: sub.max_hops(),
            });
        }
        let mut seen = vec![false; sub.node_count()];
        for &v in n {
            if v >= seen.len() || seen[v] {
                return Err(QoTError::NotSimple(v));
            }
            seen[v] = true;
        }
        for w in n.windows(2) {
            if sub.graph().edge(w[0], w[1]).is_none() {
                return Err(QoTError::MissingEdge(w[0], w[1]));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<usize> {
        self.nodes
    }

    pub fn hops(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.contains(&v)
    }

    pub fn ids(&self, sub: &SubNetwork) -> Vec<NodeId> {
        self.nodes.iter().map(|&i| sub.graph().id_of(i)).collect()
    }

    /// `1-2-4` style rendering with external ids.
    pub fn display_ids(&self, sub: &SubNetwork) -> String {
        self.ids(sub)
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Aggregation over an arbitrary edge and role lookup. Trust and intimacy
/// multiply along the path; role impact is the mean over intermediate nodes
/// and 1 for a direct edge.
pub fn aggregate_with<E, R>(nodes: &[usize], edge: E, rho: R) -> Result<QoTVector, QoTError>
where
    E: Fn(usize, usize) -> Option<EdgeQoT>,
    R: Fn(usize) -> f64,
{
    if nodes.len() < 2 {
        return Err(QoTError::TooShort);
    }
    let mut trust = 1.0;
    let mut intimacy = 1.0;
    for w in nodes.windows(2) {
        let q = edge(w[0], w[1]).ok_or(QoTError::MissingEdge(w[0], w[1]))?;
        trust *= q.trust;
        intimacy *= q.intimacy;
    }
    let inner = &nodes[1..nodes.len() - 1];
    let rho = if inner.is_empty() {
        1.0
    } else {
        inner.iter().map(|&v| rho(v)).sum::<f64>() / inner.len() as f64
    };
    Ok(QoTVector {
        trust,
        intimacy,
        rho,
    })
}

pub fn aggregate(path: &TrustPath, sub: &SubNetwork) -> Result<QoTVector, QoTError> {
    let g = sub.graph();
    aggregate_with(path.nodes(), |a, b| g.edge(a, b), |v| g.rho(v))
}

/// Weighted utility `F`, in `[0, 1]`.
pub fn utility(q: &QoTVector, w: &QoTWeights) -> f64 {
    w.trust * q.trust + w.intimacy * q.intimacy + w.rho * q.rho
}

fn deficiencies(q: &QoTVector, c: &QoTConstraints) -> [f64; 3] {
    let qs = q.components();
    let cs = c.components();
    [0, 1, 2].map(|i| (1.0 - qs[i]) / (1.0 - cs[i]))
}

/// Largest normalized deficiency; `<= 1` exactly when every constraint holds.
pub fn delta(q: &QoTVector, c: &QoTConstraints) -> f64 {
    deficiencies(q, c).into_iter().fold(0.0, f64::max)
}

/// Power-sum of normalized deficiencies. Any feasible path has
/// `g_lambda(.., 1) <= 3`.
pub fn g_lambda(q: &QoTVector, c: &QoTConstraints, lambda: f64) -> f64 {
    deficiencies(q, c).into_iter().map(|d| d.powf(lambda)).sum()
}

/// Inclusive comparison against every lower bound.
pub fn is_feasible(q: &QoTVector, c: &QoTConstraints) -> bool {
    q.trust >= c.trust && q.intimacy >= c.intimacy && q.rho >= c.rho
}
