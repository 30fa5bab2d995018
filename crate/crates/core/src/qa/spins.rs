//! Ising encoding of paths: one spin per symmetric edge pair, `+1` on edges
//! the path traverses and `-1` elsewhere.

use thiserror::Error;

use crate::moves::PathSpace;
use crate::qot::TrustPath;

#[derive(Debug, Error, PartialEq)]
pub enum SpinError {
    #[error("path edge {0}-{1} is not in the edge index")]
    MissingEdge(usize, usize),
    #[error("spin vector has {got} entries, edge index has {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn all_down(k: usize) -> Self {
        Self(vec![-1; k])
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, slot: usize) -> i8 {
        self.0[slot]
    }

    pub fn set(&mut self, slot: usize, up: bool) {
        self.0[slot] = if up { 1 } else { -1 };
    }

    /// `sum_i s_i t_i`: agreements minus disagreements.
    pub fn overlap(&self, other: &SpinVector) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| i64::from(a) * i64::from(b))
            .sum()
    }

    /// Slots with spin up, ascending.
    pub fn up_slots(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| (s > 0).then_some(i))
            .collect()
    }

    /// Occupation string over the chosen slots: `'1'` for up, `'0'` for
    /// down, with the first slot as the rightmost character.
    pub fn basis_label(&self, slots: &[usize]) -> String {
        slots
            .iter()
            .rev()
            .map(|&s| if self.0[s] > 0 { '1' } else { '0' })
            .collect()
    }
}

/// Slots traversed by a path, in path order.
pub fn path_slots(path: &[usize], space: &PathSpace) -> Result<Vec<usize>, SpinError> {
    path.windows(2)
        .map(|w| space.slot(w[0], w[1]).ok_or(SpinError::MissingEdge(w[0], w[1])))
        .collect()
}

pub fn encode_spins(path: &TrustPath, space: &PathSpace) -> Result<SpinVector, SpinError> {
    let mut spins = SpinVector::all_down(space.edge_count());
    for slot in path_slots(path.nodes(), space)? {
        spins.set(slot, true);
    }
    Ok(spins)
}

/// Edge set `(lo, hi)` of the up spins.
pub fn decode_edges(spins: &SpinVector, space: &PathSpace) -> Vec<(usize, usize)> {
    spins
        .up_slots()
        .into_iter()
        .map(|s| space.edge_endpoints(s))
        .collect()
}

/// Recovers the path a spin configuration encodes, or `None` when the up
/// spins do not form a single simple source-target path (an invalid
/// configuration).
pub fn decode_path(spins: &SpinVector, space: &PathSpace) -> Result<Option<TrustPath>, SpinError> {
    if spins.len() != space.edge_count() {
        return Err(SpinError::LengthMismatch {
            got: spins.len(),
            expected: space.edge_count(),
        });
    }
    let edges = decode_edges(spins, space);
    if edges.is_empty() {
        return Ok(None);
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); space.node_count()];
    for &(a, b) in &edges {
        incident[a].push(b);
        incident[b].push(a);
    }
    let (s, d) = (space.source(), space.target());
    let mut nodes = vec![s];
    let mut prev = usize::MAX;
    let mut cur = s;
    while cur != d {
        let next: Vec<usize> = incident[cur].iter().copied().filter(|&x| x != prev).collect();
        let expected_degree = if cur == s { 1 } else { 2 };
        if incident[cur].len() != expected_degree || next.len() != 1 {
            return Ok(None);
        }
        prev = cur;
        cur = next[0];
        if nodes.contains(&cur) {
            return Ok(None);
        }
        nodes.push(cur);
    }
    if incident[d].len() != 1 || nodes.len() - 1 != edges.len() {
        return Ok(None);
    }
    Ok(space
        .is_valid(&nodes)
        .then(|| TrustPath::from_nodes_unchecked(nodes)))
}
