//! Undecomposed baseline: one branch-and-bound over day assignments that
//! checks each day's agenda as soon as no open occurrence can still land
//! on it.

use std::time::{Duration, Instant};

use crate::model::{DailySchedule, Day, DayAssignment, FullSolution, Instance, OperatorShift};
use crate::report::{IterationRecord, SolveReport, SolveStatus};
use crate::search::{Clock, Compiled, DayState, Val};
use crate::subproblem::{sp_solve, sp_solve_until, DayDemand, SpOutcome};

pub fn monolithic_solve(instance: &Instance, time_budget: Duration) -> SolveReport {
    let started = Instant::now();
    let deadline = started + time_budget;
    let c = Compiled::new(instance);

    // a day is settled once the last occurrence whose window covers it is branched
    let mut settles_at: Vec<Vec<Day>> = vec![Vec::new(); c.occs.len()];
    for day in 1..=c.horizon {
        if let Some(last) = (0..c.occs.len()).rev().find(|&i| c.occs[i].domain.contains(&day)) {
            settles_at[last].push(day);
        }
    }
    let shifts: Vec<Vec<OperatorShift>> = (0..=c.horizon).map(|d| instance.shifts_on(d)).collect();

    let mut m = Mono {
        c: &c,
        state: DayState::new(&c),
        settles_at,
        shifts,
        deadline,
        clock: Clock::new(deadline),
        best: 0,
        incumbent: None,
        interrupted_bound: 0,
        sp_calls: 0,
        sp_time: Duration::ZERO,
    };
    let root_bound = m.bound(0);
    let complete = if root_bound == 0 {
        true
    } else if m.clock.expired {
        m.interrupted_bound = root_bound;
        false
    } else {
        m.dfs(0);
        !m.clock.expired
    };
    let upper_bound = if complete {
        m.best
    } else {
        m.best.max(m.interrupted_bound)
    };

    let assignment = m
        .incumbent
        .take()
        .unwrap_or_else(|| DayAssignment::unscheduled(instance));
    // every used day of the incumbent already passed its check
    let agendas: Vec<DailySchedule> = assignment
        .days_used()
        .into_iter()
        .map(|day| {
            let demand = DayDemand::from_assignment(instance, &assignment, day).expect("valid keys");
            match sp_solve(&demand, &m.shifts[day as usize]) {
                SpOutcome::Feasible(s) => s,
                SpOutcome::Infeasible => unreachable!("incumbent day {day} was checked feasible"),
            }
        })
        .collect();
    let objective = m.best;
    let total_time = started.elapsed();
    SolveReport {
        status: if complete {
            SolveStatus::Optimal
        } else {
            SolveStatus::TimeLimit
        },
        solution: FullSolution {
            assignment: assignment.clone(),
            agendas,
        },
        objective,
        upper_bound,
        iterations: vec![IterationRecord {
            master_objective: objective,
            upper_bound,
            lower_bound: objective,
            infeasible_days: Vec::new(),
            new_cuts: Vec::new(),
            assignment,
        }],
        cuts: Vec::new(),
        sp_calls: m.sp_calls,
        master_time: total_time.saturating_sub(m.sp_time),
        sp_time: m.sp_time,
        total_time,
    }
}

struct Mono<'c, 'a> {
    c: &'c Compiled<'a>,
    state: DayState,
    settles_at: Vec<Vec<Day>>,
    shifts: Vec<Vec<OperatorShift>>,
    deadline: Instant,
    clock: Clock,
    best: usize,
    incumbent: Option<DayAssignment>,
    interrupted_bound: usize,
    sp_calls: usize,
    sp_time: Duration,
}

impl Mono<'_, '_> {
    fn bound(&self, depth: usize) -> usize {
        let open = (depth..self.c.occs.len())
            .filter(|&i| self.c.occs[i].domain.iter().any(|&d| self.candidate(i, d)))
            .count();
        self.state.scheduled + open
    }

    /// Total shift time per care unit is a necessary condition for any agenda.
    fn candidate(&self, occ: usize, day: Day) -> bool {
        self.state.fits_capacity(self.c, occ, day) && !self.state.conflicts(self.c, occ, day)
    }

    /// Agenda check of the days settled by branching `depth`.
    fn settled_days_ok(&mut self, depth: usize) -> bool {
        for k in 0..self.settles_at[depth].len() {
            let day = self.settles_at[depth][k];
            let pairs = self.state.demand_on(self.c, day);
            if pairs.is_empty() {
                continue;
            }
            let demand = DayDemand::from_placements(self.c.instance, day, pairs).expect("valid services");
            let t = Instant::now();
            let outcome = sp_solve_until(&demand, &self.shifts[day as usize], Some(self.deadline));
            self.sp_time += t.elapsed();
            self.sp_calls += 1;
            match outcome {
                Some(SpOutcome::Feasible(_)) => {}
                Some(SpOutcome::Infeasible) => return false,
                None => {
                    self.clock.expired = true;
                    return false;
                }
            }
        }
        true
    }

    fn dfs(&mut self, depth: usize) {
        if depth == self.c.occs.len() {
            if self.state.scheduled > self.best {
                self.best = self.state.scheduled;
                self.incumbent = Some(self.state.to_assignment(self.c));
            }
            return;
        }
        let bound = self.bound(depth);
        if bound <= self.best {
            return;
        }
        if self.clock.tick() {
            self.interrupted_bound = self.interrupted_bound.max(bound);
            return;
        }
        let patient = self.c.occs[depth].patient;
        for k in 0..self.c.occs[depth].domain.len() {
            let day = self.c.occs[depth].domain[k];
            if !self.candidate(depth, day) {
                continue;
            }
            self.state.apply(self.c, depth, day);
            if self.state.necessity_ok(self.c, patient) && self.settled_days_ok(depth) {
                self.dfs(depth + 1);
            }
            self.state.undo(self.c, depth, day);
            if self.clock.expired {
                self.interrupted_bound = self.interrupted_bound.max(bound);
                return;
            }
            if self.bound(depth) <= self.best {
                return;
            }
        }
        self.state.vals[depth] = Val::Unscheduled;
        if self.state.necessity_ok(self.c, patient) && self.settled_days_ok(depth) {
            self.dfs(depth + 1);
        }
        self.state.vals[depth] = Val::Open;
        if self.clock.expired {
            self.interrupted_bound = self.interrupted_bound.max(bound);
        }
    }
}
