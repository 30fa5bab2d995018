use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::qot::TrustPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "optimal-found")]
    OptimalFound,
    #[serde(rename = "infeasible-instance")]
    InfeasibleInstance,
    #[serde(rename = "no-path")]
    NoPath,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::OptimalFound => "optimal-found",
            Status::InfeasibleInstance => "infeasible-instance",
            Status::NoPath => "no-path",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a path search. `path` is present exactly when the status is
/// [`Status::OptimalFound`], in which case the path is feasible. Solvers
/// other than the oracle use the same status for their best feasible find.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub path: Option<TrustPath>,
    pub utility: Option<f64>,
    pub feasible: bool,
    pub status: Status,
}

impl OptResult {
    pub fn found(path: TrustPath, utility: f64) -> Self {
        Self {
            path: Some(path),
            utility: Some(utility),
            feasible: true,
            status: Status::OptimalFound,
        }
    }

    pub fn infeasible() -> Self {
        Self {
            path: None,
            utility: None,
            feasible: false,
            status: Status::InfeasibleInstance,
        }
    }

    pub fn no_path() -> Self {
        Self {
            path: None,
            utility: None,
            feasible: false,
            status: Status::NoPath,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverId {
    Qa,
    Sa,
    Mfpb,
    Hmcop,
    Oracle,
}

impl SolverId {
    pub const ALL: [SolverId; 5] = [
        SolverId::Qa,
        SolverId::Sa,
        SolverId::Mfpb,
        SolverId::Hmcop,
        SolverId::Oracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverId::Qa => "qa",
            SolverId::Sa => "sa",
            SolverId::Mfpb => "mfpb",
            SolverId::Hmcop => "hmcop",
            SolverId::Oracle => "oracle",
        }
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown solver '{s}' (expected qa|sa|mfpb|hmcop|oracle)"))
    }
}

/// A solver run: its result plus telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub result: OptResult,
    pub steps_executed: u64,
    pub moves_attempted: u64,
    pub moves_accepted: u64,
    /// Seconds.
    pub wall_time: f64,
    pub solver: SolverId,
}

impl SolveOutcome {
    pub fn new(solver: SolverId, result: OptResult) -> Self {
        Self {
            result,
            steps_executed: 0,
            moves_attempted: 0,
            moves_accepted: 0,
            wall_time: 0.0,
            solver,
        }
    }

    /// Keeps the better result of `self` and `other` (higher utility, then
    /// fewer hops, then `self`), summing telemetry.
    pub fn absorb(&mut self, other: SolveOutcome) {
        let better = match (&self.result.utility, &other.result.utility) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => {
                b > a
                    || (b == a
                        && other.result.path.as_ref().map(|p| p.hops())
                            < self.result.path.as_ref().map(|p| p.hops()))
            }
            (None, None) => self.result.status == Status::NoPath && other.result.status != Status::NoPath,
            _ => false,
        };
        if better {
            self.result = other.result;
        }
        self.steps_executed += other.steps_executed;
        self.moves_attempted += other.moves_attempted;
        self.moves_accepted += other.moves_accepted;
        self.wall_time += other.wall_time;
    }

    /// Equality ignoring `wall_time`.
    pub fn same_run(&self, other: &Self) -> bool {
        self.result == other.result
            && self.steps_executed == other.steps_executed
            && self.moves_attempted == other.moves_attempted
            && self.moves_accepted == other.moves_accepted
            && self.solver == other.solver
    }
}

/// Deterministic child seed for stream `index` of `base` (splitmix64 step).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
