//! Path-integral Monte Carlo quantum annealing over a ring of coupled path
//! replicas.

pub mod replica;
pub mod schedule;
pub mod spins;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::SubNetwork;
use crate::moves::{propose_move, PathSpace};
use crate::outcome::{OptResult, SolveOutcome, SolverId};
use crate::qot::{QoTConstraints, QoTWeights, TrustPath};
use crate::sa::{metropolis, BestFeasible, ParamError};

pub use replica::{effective_hamiltonian, local_move_delta, Potential, Proposal, Replica, ReplicaSystem};
pub use schedule::{coupling_jt, coupling_jt_uncapped, gamma_schedule};
pub use spins::{decode_path, encode_spins, SpinError, SpinVector};

/// Metropolis acceptance on the effective Hamiltonian at temperature `t`.
pub fn qa_accept<R: Rng + ?Sized>(delta_h: f64, t: f64, rng: &mut R) -> bool {
    metropolis(delta_h, t, rng)
}

/// Per-step move budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MoveBudget {
    /// `moves_multiplier * N` attempts per step, shared by all replicas.
    #[default]
    Total,
    /// `moves_multiplier * N` attempts per step for every replica.
    PerReplica,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TemperatureSchedule {
    #[default]
    Fixed,
    /// Linear from `t0` at the first step down to the simulation temperature
    /// at the last.
    Linear { t0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaParams {
    /// Replica count `P`.
    pub replicas: usize,
    pub temperature: f64,
    pub gamma0: f64,
    pub xi: f64,
    pub max_steps: usize,
    /// Neighborhood pruning size.
    pub prune: usize,
    pub moves_multiplier: usize,
    pub move_budget: MoveBudget,
    pub penalty_beta: f64,
    pub jt_cap: f64,
    pub temperature_schedule: TemperatureSchedule,
    /// Pure-potential Metropolis sweeps at `P * T` before annealing.
    pub warmup_sweeps: usize,
    pub seed: u64,
}

impl Default for QaParams {
    fn default() -> Self {
        Self {
            replicas: 30,
            temperature: 10.0 / 3.0,
            gamma0: 300.0,
            xi: 0.1,
            max_steps: 500,
            prune: 20,
            moves_multiplier: 20,
            move_budget: MoveBudget::Total,
            penalty_beta: 1.0,
            jt_cap: 1e6,
            temperature_schedule: TemperatureSchedule::Fixed,
            warmup_sweeps: 50,
            seed: 0,
        }
    }
}

impl QaParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |m: String| Err(ParamError::Invalid(m));
        if self.replicas < 2 {
            return bad(format!("replica count must be >= 2, got {}", self.replicas));
        }
        if !(self.temperature > 0.0) {
            return bad(format!("temperature must be > 0, got {}", self.temperature));
        }
        if !(self.gamma0 > 0.0) {
            return bad(format!("gamma0 must be > 0, got {}", self.gamma0));
        }
        if !(self.xi > 0.0) {
            return bad(format!("xi must be > 0, got {}", self.xi));
        }
        if !(self.jt_cap > 0.0) {
            return bad(format!("jt_cap must be > 0, got {}", self.jt_cap));
        }
        if let TemperatureSchedule::Linear { t0 } = self.temperature_schedule {
            if !(t0 > 0.0) {
                return bad(format!("initial temperature must be > 0, got {t0}"));
            }
        }
        if self.max_steps == 0 || self.prune == 0 || self.moves_multiplier == 0 {
            return bad("max_steps, prune and moves_multiplier must be positive".into());
        }
        Ok(())
    }

    fn temperature_at(&self, step: usize, eta: f64) -> f64 {
        match self.temperature_schedule {
            TemperatureSchedule::Fixed => self.temperature,
            TemperatureSchedule::Linear { t0 } => {
                let s = (step as f64 / eta).min(1.0);
                t0 + (self.temperature - t0) * s
            }
        }
    }
}

/// Per-step state handed to observers of [`qa_solve_traced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTrace {
    pub step: usize,
    pub gamma: f64,
    pub jt: f64,
    pub temperature: f64,
    pub best_utility: Option<f64>,
    pub mean_overlap: f64,
}

pub fn qa_solve(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    params: &QaParams,
) -> Result<SolveOutcome, ParamError> {
    qa_solve_traced(sub, w, c, params, |_| {})
}

/// Like [`qa_solve`], calling `observe` after each annealing step.
pub fn qa_solve_traced<F>(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    params: &QaParams,
    mut observe: F,
) -> Result<SolveOutcome, ParamError>
where
    F: FnMut(&StepTrace),
{
    params.validate()?;
    let started = Instant::now();
    let mut out = SolveOutcome::new(SolverId::Qa, OptResult::no_path());
    if sub.is_empty() {
        out.wall_time = started.elapsed().as_secs_f64();
        return Ok(out);
    }
    let space = PathSpace::new(sub, params.prune, w);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let p = params.replicas;
    let mut initial: Vec<TrustPath> = Vec::with_capacity(p);
    for _ in 0..p {
        match space.random_path(&mut rng) {
            Some(path) => initial.push(path),
            None => {
                out.wall_time = started.elapsed().as_secs_f64();
                return Ok(out);
            }
        }
    }
    let potential = Potential {
        weights: *w,
        constraints: *c,
        beta: params.penalty_beta,
    };
    let mut best = BestFeasible::default();
    let n = space.node_count();

    // Equilibrate each replica on the bare potential at P*T.
    let hot = p as f64 * params.temperature;
    for path in &mut initial {
        let (q, mut e) = potential.evaluate(&space, path);
        best.offer(path, &q, w, c);
        for _ in 0..params.warmup_sweeps * n {
            let cand = propose_move(path, &space, &mut rng);
            let (q, e_new) = potential.evaluate(&space, &cand);
            if metropolis(e_new - e, hot, &mut rng) {
                *path = cand;
                e = e_new;
                best.offer(path, &q, w, c);
            }
        }
    }

    let mut system = ReplicaSystem::new(&space, potential, initial).expect("random paths are indexed");
    let eta = (params.max_steps.saturating_sub(1)).max(1) as f64;
    let per_step = params.moves_multiplier * n
        * match params.move_budget {
            MoveBudget::Total => 1,
            MoveBudget::PerReplica => p,
        };
    let mut order: Vec<usize> = (0..p).collect();
    for step in 0..params.max_steps {
        let gamma = gamma_schedule(step as f64, eta, params.gamma0, params.xi);
        let jt = coupling_jt(gamma, p, params.temperature, params.jt_cap);
        let temperature = params.temperature_at(step, eta);
        order.shuffle(&mut rng);
        for k in 0..per_step {
            let r = order[k % p];
            let cand = propose_move(&system.replica(r).path, &space, &mut rng);
            out.moves_attempted += 1;
            let prop = system.propose(r, cand, jt);
            if qa_accept(prop.delta, temperature, &mut rng) {
                out.moves_accepted += 1;
                best.offer(&prop.path, &prop.qot, w, c);
                system.apply(prop);
            }
        }
        out.steps_executed += 1;
        observe(&StepTrace {
            step,
            gamma,
            jt,
            temperature,
            best_utility: best.utility(),
            mean_overlap: system.mean_adjacent_overlap(),
        });
    }
    out.result = best.into_result();
    out.wall_time = started.elapsed().as_secs_f64();
    Ok(out)
}
