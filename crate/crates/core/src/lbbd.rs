//! Decomposition driver: solve the master, check every used day, turn each
//! infeasible day into a no-good, and repeat until all days are feasible.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use log::info;
use rayon::prelude::*;

use crate::error::ModelError;
use crate::master::{cut_blocks, master_solve_until, CutPool, NoGoodCut};
use crate::model::{DailySchedule, Day, DayAssignment, FullSolution, Instance};
use crate::report::{IterationRecord, SolveReport, SolveStatus};
use crate::subproblem::{sp_solve_until, DayDemand, SpOutcome};
use crate::verify::check_assignment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriverConfig {
    pub time_budget: Duration,
    /// Solve the subproblems of one round on the rayon pool.
    pub parallel_subproblems: bool,
    /// Recorded for reproducibility only; the solver is deterministic.
    pub seed: u64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            time_budget: Duration::from_secs(60),
            parallel_subproblems: false,
            seed: 0,
        }
    }
}

/// The no-good for an infeasible `day`: every occurrence assigned to it.
pub fn compute_nogood(day: Day, assignment: &DayAssignment, gid: u64) -> Result<NoGoodCut, ModelError> {
    let group: std::collections::BTreeSet<_> = assignment.on_day(day).into_iter().collect();
    if group.is_empty() {
        return Err(ModelError::Input(format!(
            "day {day} holds no occurrence and cannot be infeasible"
        )));
    }
    Ok(NoGoodCut { day, group, gid })
}

pub fn lbbd_solve(instance: &Instance, config: &DriverConfig) -> SolveReport {
    let started = Instant::now();
    let deadline = started + config.time_budget;
    let mut pool = CutPool::new();
    let mut iterations = Vec::new();
    let mut best: Option<(FullSolution, usize)> = None;
    let mut upper_bound = instance.occurrences.len();
    let mut master_time = Duration::ZERO;
    let mut sp_time = Duration::ZERO;
    let mut sp_calls = 0;

    let finish = |status,
                  best: Option<(FullSolution, usize)>,
                  upper_bound,
                  iterations,
                  pool: CutPool,
                  master_time,
                  sp_time,
                  sp_calls| {
        let (solution, objective) = best.unwrap_or_else(|| (FullSolution::empty(instance), 0));
        SolveReport {
            status,
            solution,
            objective,
            upper_bound,
            iterations,
            cuts: pool.iter().cloned().collect(),
            sp_calls,
            master_time,
            sp_time,
            total_time: started.elapsed(),
        }
    };

    loop {
        let t = Instant::now();
        let master = master_solve_until(instance, &pool, deadline);
        master_time += t.elapsed();
        upper_bound = upper_bound.min(master.upper_bound);
        if master.status == SolveStatus::TimeLimit {
            return finish(
                SolveStatus::TimeLimit,
                best,
                upper_bound,
                iterations,
                pool,
                master_time,
                sp_time,
                sp_calls,
            );
        }
        // The master always admits the all-unscheduled assignment, so the
        // "master infeasible" exit of the textbook loop cannot occur here.
        let assignment = master.assignment;

        let t = Instant::now();
        let days: Vec<Day> = assignment.days_used().into_iter().collect();
        let solve_day = |&day: &Day| {
            let demand =
                DayDemand::from_assignment(instance, &assignment, day).expect("master keys are valid");
            (
                day,
                sp_solve_until(&demand, &instance.shifts_on(day), Some(deadline)),
            )
        };
        let outcomes: Vec<(Day, Option<SpOutcome>)> = if config.parallel_subproblems {
            days.par_iter().map(solve_day).collect()
        } else {
            days.iter().map(solve_day).collect()
        };
        sp_time += t.elapsed();
        sp_calls += outcomes.len();

        let mut schedules: BTreeMap<Day, DailySchedule> = BTreeMap::new();
        let mut infeasible = Vec::new();
        let mut timed_out = false;
        for (day, outcome) in outcomes {
            match outcome {
                Some(SpOutcome::Feasible(s)) => {
                    schedules.insert(day, s);
                }
                Some(SpOutcome::Infeasible) => infeasible.push(day),
                None => timed_out = true,
            }
        }
        if timed_out {
            return finish(
                SolveStatus::TimeLimit,
                best,
                upper_bound,
                iterations,
                pool,
                master_time,
                sp_time,
                sp_calls,
            );
        }

        if infeasible.is_empty() {
            let objective = master.objective;
            iterations.push(IterationRecord {
                master_objective: master.objective,
                upper_bound,
                lower_bound: objective,
                infeasible_days: Vec::new(),
                new_cuts: Vec::new(),
                assignment: assignment.clone(),
            });
            info!(
                "iter={} master_obj={} infeasible_days=0 cuts={} elapsed_ms={}",
                iterations.len(),
                master.objective,
                pool.len(),
                started.elapsed().as_millis()
            );
            let solution = FullSolution {
                assignment,
                agendas: schedules.into_values().collect(),
            };
            return finish(
                SolveStatus::Optimal,
                Some((solution, objective)),
                upper_bound,
                iterations,
                pool,
                master_time,
                sp_time,
                sp_calls,
            );
        }

        // dropping the packets of failed days may still leave a valid plan
        let mut partial = assignment.clone();
        for &day in &infeasible {
            for key in assignment.on_day(day) {
                partial.set(key, None);
            }
        }
        let partial_objective = partial.scheduled_count();
        if best.as_ref().map_or(0, |b| b.1) < partial_objective
            && check_assignment(instance, &partial).is_ok_and(|v| v.is_empty())
        {
            let solution = FullSolution {
                assignment: partial,
                agendas: schedules.into_values().collect(),
            };
            best = Some((solution, partial_objective));
        }

        let mut new_cuts = Vec::new();
        for &day in &infeasible {
            let cut = compute_nogood(day, &assignment, pool.last_gid() + 1).expect("day has occurrences");
            debug_assert!(cut_blocks(&cut, &assignment));
            let gid = cut.gid;
            if pool.add(cut).expect("gids increase") {
                new_cuts.push(gid);
            }
        }
        let lower_bound = best.as_ref().map_or(0, |b| b.1);
        info!(
            "iter={} master_obj={} infeasible_days={} cuts={} elapsed_ms={}",
            iterations.len() + 1,
            master.objective,
            infeasible.len(),
            pool.len(),
            started.elapsed().as_millis()
        );
        iterations.push(IterationRecord {
            master_objective: master.objective,
            upper_bound,
            lower_bound,
            infeasible_days: infeasible,
            new_cuts,
            assignment,
        });
    }
}
