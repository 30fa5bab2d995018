//! Ring of Trotter replicas and the effective classical Hamiltonian
//!
//! `H = (1/P) sum_r H_pot(w_r) - J_T [ sum_{r<P} Y_r . Y_{r+1} + Y_1 . Y_P ]`.

use crate::moves::PathSpace;
use crate::qa::spins::{encode_spins, path_slots, SpinError, SpinVector};
use crate::qot::{QoTConstraints, QoTVector, QoTWeights, TrustPath};
use crate::sa::qot_energy;

/// Classical potential: the same energy the SA baseline minimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub weights: QoTWeights,
    pub constraints: QoTConstraints,
    pub beta: f64,
}

impl Potential {
    pub fn energy(&self, q: &QoTVector) -> f64 {
        qot_energy(q, &self.weights, &self.constraints, self.beta)
    }

    pub fn evaluate(&self, space: &PathSpace, path: &TrustPath) -> (QoTVector, f64) {
        let q = space.aggregate(path.nodes()).expect("replica paths are valid");
        (q, self.energy(&q))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replica {
    pub path: TrustPath,
    /// Edge slots of `path`, in path order.
    pub slots: Vec<usize>,
    pub spins: SpinVector,
    pub qot: QoTVector,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct ReplicaSystem<'a> {
    space: &'a PathSpace,
    potential: Potential,
    replicas: Vec<Replica>,
}

impl<'a> ReplicaSystem<'a> {
    pub fn new(
        space: &'a PathSpace,
        potential: Potential,
        paths: Vec<TrustPath>,
    ) -> Result<Self, SpinError> {
        let replicas = paths
            .into_iter()
            .map(|path| {
                let spins = encode_spins(&path, space)?;
                let slots = path_slots(path.nodes(), space)?;
                let (qot, energy) = potential.evaluate(space, &path);
                Ok(Replica {
                    path,
                    slots,
                    spins,
                    qot,
                    energy,
                })
            })
            .collect::<Result<Vec<_>, SpinError>>()?;
        assert!(replicas.len() >= 2, "a replica ring needs at least two replicas");
        Ok(Self {
            space,
            potential,
            replicas,
        })
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    pub fn replicas(&self) -> &[Replica] {
        &self.replicas
    }

    pub fn replica(&self, r: usize) -> &Replica {
        &self.replicas[r]
    }

    pub fn space(&self) -> &PathSpace {
        self.space
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    fn ring_neighbors(&self, r: usize) -> (usize, usize) {
        let p = self.replicas.len();
        ((r + p - 1) % p, (r + 1) % p)
    }

    /// Ring coupling sum including the closing term between the last and
    /// first replica.
    pub fn coupling_sum(&self) -> i64 {
        let p = self.replicas.len();
        let chain: i64 = (0..p - 1)
            .map(|r| self.replicas[r].spins.overlap(&self.replicas[r + 1].spins))
            .sum();
        chain + self.replicas[0].spins.overlap(&self.replicas[p - 1].spins)
    }

    pub fn mean_potential(&self) -> f64 {
        self.replicas.iter().map(|r| r.energy).sum::<f64>() / self.replicas.len() as f64
    }

    /// Mean normalized overlap `(1/K) Y_r . Y_{r+1}` over the ring's pairs.
    pub fn mean_adjacent_overlap(&self) -> f64 {
        let k = self.space.edge_count().max(1) as f64;
        let p = self.replicas.len();
        let chain: i64 = (0..p)
            .map(|r| self.replicas[r].spins.overlap(&self.replicas[(r + 1) % p].spins))
            .sum();
        chain as f64 / (p as f64 * k)
    }

    /// Change of ring coupling if replica `r` moved to `new_slots`. Slots on
    /// both paths keep their spin and cancel, so only flipped slots count.
    fn coupling_change(&self, r: usize, new_slots: &[usize]) -> i64 {
        let (prev, next) = self.ring_neighbors(r);
        let (a, b) = (&self.replicas[prev].spins, &self.replicas[next].spins);
        let field = |s: &[usize]| -> i64 {
            s.iter()
                .map(|&slot| i64::from(a.get(slot)) + i64::from(b.get(slot)))
                .sum()
        };
        2 * (field(new_slots) - field(&self.replicas[r].slots))
    }

    /// Incremental `Delta H` for replacing replica `r`'s path with
    /// `new_path`.
    pub fn propose(&self, r: usize, new_path: TrustPath, jt: f64) -> Proposal {
        let slots = path_slots(new_path.nodes(), self.space).expect("proposals are indexed");
        let (qot, energy) = self.potential.evaluate(self.space, &new_path);
        let d_pot = (energy - self.replicas[r].energy) / self.replicas.len() as f64;
        let delta = d_pot - jt * self.coupling_change(r, &slots) as f64;
        Proposal {
            replica: r,
            path: new_path,
            slots,
            qot,
            energy,
            delta,
        }
    }

    /// Installs a proposal, flipping only the changed spins.
    pub fn apply(&mut self, p: Proposal) {
        let rep = &mut self.replicas[p.replica];
        for &s in &rep.slots {
            rep.spins.set(s, false);
        }
        for &s in &p.slots {
            rep.spins.set(s, true);
        }
        rep.path = p.path;
        rep.slots = p.slots;
        rep.qot = p.qot;
        rep.energy = p.energy;
    }
}

/// A candidate path for one replica with its energy change.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub replica: usize,
    pub path: TrustPath,
    pub slots: Vec<usize>,
    pub qot: QoTVector,
    pub energy: f64,
    pub delta: f64,
}

/// Full evaluation of the effective Hamiltonian.
pub fn effective_hamiltonian(system: &ReplicaSystem<'_>, jt: f64) -> f64 {
    system.mean_potential() - jt * system.coupling_sum() as f64
}

/// `Delta H` of moving replica `r` to `new_path`, computed from the spins
/// that change.
pub fn local_move_delta(system: &ReplicaSystem<'_>, r: usize, new_path: &TrustPath, jt: f64) -> f64 {
    system.propose(r, new_path.clone(), jt).delta
}
