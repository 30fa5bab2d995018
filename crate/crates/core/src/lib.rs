//! Optimal social trust path selection: QoT model, exact and heuristic
//! baselines, simulated annealing and replica-based quantum annealing, plus
//! a benchmark harness.

pub mod graph;
pub mod heuristics;
pub mod moves;
pub mod oracle;
pub mod outcome;
pub mod qa;
pub mod qot;
pub mod sa;
pub mod bench;
