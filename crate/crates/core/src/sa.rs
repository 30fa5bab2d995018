//! Classical simulated annealing over valid paths with plus-minus moves and
//! Metropolis acceptance under geometric cooling.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SubNetwork;
use crate::moves::{propose_move, PathSpace};
use crate::outcome::{OptResult, SolveOutcome, SolverId};
use crate::qot::{
    aggregate, is_feasible, utility, QoTConstraints, QoTError, QoTVector, QoTWeights, TrustPath,
};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Energy of an aggregated QoT vector: `(1 - F)` plus `beta` times the
/// summed relative constraint violations. The penalty is zero exactly when
/// the vector is feasible.
pub fn qot_energy(q: &QoTVector, w: &QoTWeights, c: &QoTConstraints, beta: f64) -> f64 {
    let violation = |bound: f64, value: f64| {
        let scale = if bound == 0.0 { 1.0 } else { bound };
        ((bound - value) / scale).max(0.0)
    };
    let penalty = violation(c.trust, q.trust)
        + violation(c.intimacy, q.intimacy)
        + violation(c.rho, q.rho);
    (1.0 - utility(q, w)) + beta * penalty
}

pub fn path_energy(
    path: &TrustPath,
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    beta: f64,
) -> Result<f64, QoTError> {
    Ok(qot_energy(&aggregate(path, sub)?, w, c, beta))
}

/// Metropolis criterion at control temperature `t`.
pub fn sa_accept<R: Rng + ?Sized>(e_cur: f64, e_new: f64, t: f64, rng: &mut R) -> bool {
    metropolis(e_new - e_cur, t, rng)
}

pub(crate) fn metropolis<R: Rng + ?Sized>(delta_e: f64, t: f64, rng: &mut R) -> bool {
    debug_assert!(t > 0.0);
    if delta_e <= 0.0 {
        return true;
    }
    rng.gen::<f64>() < (-delta_e / t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    pub t0: f64,
    pub cooling: f64,
    pub max_steps: usize,
    pub moves_per_step: usize,
    /// Static neighborhood pruning size.
    pub prune: usize,
    pub penalty_beta: f64,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            t0: 1.0,
            cooling: 0.98,
            max_steps: 500,
            moves_per_step: 200,
            prune: 20,
            penalty_beta: 1.0,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.t0 > 0.0) {
            return Err(ParamError::Invalid(format!("t0 must be > 0, got {}", self.t0)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(ParamError::Invalid(format!(
                "cooling must lie in (0, 1), got {}",
                self.cooling
            )));
        }
        if self.max_steps == 0 || self.moves_per_step == 0 || self.prune == 0 {
            return Err(ParamError::Invalid(
                "max_steps, moves_per_step and prune must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Tracks the best feasible path seen so far.
#[derive(Debug, Default)]
pub(crate) struct BestFeasible {
    best: Option<(f64, TrustPath)>,
}

impl BestFeasible {
    pub fn offer(&mut self, path: &TrustPath, q: &QoTVector, w: &QoTWeights, c: &QoTConstraints) {
        if !is_feasible(q, c) {
            return;
        }
        let u = utility(q, w);
        let better = match &self.best {
            None => true,
            Some((bu, bp)) => u > *bu || (u == *bu && path.hops() < bp.hops()),
        };
        if better {
            self.best = Some((u, path.clone()));
        }
    }

    pub fn utility(&self) -> Option<f64> {
        self.best.as_ref().map(|(u, _)| *u)
    }

    pub fn into_result(self) -> OptResult {
        match self.best {
            Some((u, p)) => OptResult::found(p, u),
            None => OptResult::infeasible(),
        }
    }
}

pub fn sa_solve(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    params: &SaParams,
) -> Result<SolveOutcome, ParamError> {
    sa_solve_traced(sub, w, c, params, |_, _| {})
}

/// Like [`sa_solve`], calling `observe(step, best_utility)` after each step.
pub fn sa_solve_traced<F>(
    sub: &SubNetwork,
    w: &QoTWeights,
    c: &QoTConstraints,
    params: &SaParams,
    mut observe: F,
) -> Result<SolveOutcome, ParamError>
where
    F: FnMut(usize, Option<f64>),
{
    params.validate()?;
    let started = Instant::now();
    let mut out = SolveOutcome::new(SolverId::Sa, OptResult::no_path());
    if sub.is_empty() {
        out.wall_time = started.elapsed().as_secs_f64();
        return Ok(out);
    }
    let space = PathSpace::new(sub, params.prune, w);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let Some(mut current) = space.random_path(&mut rng) else {
        out.wall_time = started.elapsed().as_secs_f64();
        return Ok(out);
    };
    let energy_of = |p: &TrustPath| -> (QoTVector, f64) {
        let q = space.aggregate(p.nodes()).expect("moves keep paths valid");
        (q, qot_energy(&q, w, c, params.penalty_beta))
    };
    let (q0, mut e_cur) = energy_of(&current);
    let mut best = BestFeasible::default();
    best.offer(&current, &q0, w, c);

    let mut t = params.t0;
    for step in 0..params.max_steps {
        for _ in 0..params.moves_per_step {
            let candidate = propose_move(&current, &space, &mut rng);
            out.moves_attempted += 1;
            let (q, e_new) = energy_of(&candidate);
            if sa_accept(e_cur, e_new, t, &mut rng) {
                out.moves_accepted += 1;
                current = candidate;
                e_cur = e_new;
                best.offer(&current, &q, w, c);
            }
        }
        out.steps_executed += 1;
        observe(step, best.utility());
        t *= params.cooling;
    }
    out.result = best.into_result();
    out.wall_time = started.elapsed().as_secs_f64();
    Ok(out)
}
