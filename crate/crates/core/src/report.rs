use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::master::NoGoodCut;
use crate::model::{Day, DayAssignment, FullSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::TimeLimit => "timelimit",
        })
    }
}

/// One master/subproblem round of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub master_objective: usize,
    /// Best proven upper bound after this round.
    pub upper_bound: usize,
    /// Best verified objective after this round.
    pub lower_bound: usize,
    pub infeasible_days: Vec<Day>,
    pub new_cuts: Vec<u64>,
    pub assignment: DayAssignment,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub solution: FullSolution,
    pub objective: usize,
    pub upper_bound: usize,
    pub iterations: Vec<IterationRecord>,
    pub cuts: Vec<NoGoodCut>,
    pub sp_calls: usize,
    pub master_time: Duration,
    pub sp_time: Duration,
    pub total_time: Duration,
}

impl SolveReport {
    pub fn upper_bound_trace(&self) -> Vec<usize> {
        self.iterations.iter().map(|r| r.upper_bound).collect()
    }

    pub fn lower_bound_trace(&self) -> Vec<usize> {
        self.iterations.iter().map(|r| r.lower_bound).collect()
    }
}
