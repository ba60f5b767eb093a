//! Master problem: choose a day (or none) for every packet occurrence,
//! maximising the number scheduled, under the day-level rules, the
//! per-care-unit capacity relaxation and the accumulated no-good cuts.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::error::ModelError;
use crate::model::{service_placements, CareUnitId, Day, DayAssignment, Instance, OccurrenceKey};
use crate::search::{Clock, Compiled, DayState, Val};
use crate::SolveStatus;

/// Forbids the whole `group` from sharing `day`; any proper subset may.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoGoodCut {
    pub day: Day,
    pub group: BTreeSet<OccurrenceKey>,
    pub gid: u64,
}

/// No-goods retained across master re-solves.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CutPool {
    cuts: Vec<NoGoodCut>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `cut` unless an identical (day, group) cut is present; returns
    /// whether it was added. Group ids must be strictly increasing.
    pub fn add(&mut self, cut: NoGoodCut) -> Result<bool, ModelError> {
        if cut.group.is_empty() {
            return Err(ModelError::Input("no-good with an empty group".into()));
        }
        if let Some(last) = self.cuts.last() {
            if cut.gid <= last.gid {
                return Err(ModelError::Input(format!(
                    "gid {} not above previous gid {}",
                    cut.gid, last.gid
                )));
            }
        }
        if self.contains(cut.day, &cut.group) {
            return Ok(false);
        }
        self.cuts.push(cut);
        Ok(true)
    }

    pub fn contains(&self, day: Day, group: &BTreeSet<OccurrenceKey>) -> bool {
        self.cuts.iter().any(|c| c.day == day && c.group == *group)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NoGoodCut> {
        self.cuts.iter()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn last_gid(&self) -> u64 {
        self.cuts.last().map_or(0, |c| c.gid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterOutcome {
    pub status: SolveStatus,
    pub assignment: DayAssignment,
    pub objective: usize,
    pub upper_bound: usize,
    pub nodes: u64,
}

/// True iff every member of the group is assigned exactly `cut.day`.
pub fn cut_blocks(cut: &NoGoodCut, assignment: &DayAssignment) -> bool {
    !cut.group.is_empty() && cut.group.iter().all(|k| assignment.get(k) == Some(cut.day))
}

/// Per day and care unit, scheduled service time never exceeds the summed
/// shift durations. Keys unknown to `instance` are ignored.
pub fn capacity_ok(instance: &Instance, assignment: &DayAssignment) -> bool {
    let known: DayAssignment = assignment
        .iter()
        .filter(|(k, _)| instance.occurrence(k).is_some())
        .map(|(k, d)| (*k, d))
        .collect();
    let placements = service_placements(instance, &known).expect("keys filtered");
    let mut load: HashMap<(Day, CareUnitId), u32> = HashMap::new();
    for (_, s, d) in placements {
        if let Some(def) = instance.service(s) {
            *load.entry((d, def.care_unit)).or_default() += def.duration;
        }
    }
    load.into_iter().all(|((d, cu), l)| l <= instance.capacity(d, cu))
}

pub fn master_solve(instance: &Instance, pool: &CutPool, time_budget: Duration) -> MasterOutcome {
    master_solve_until(instance, pool, Instant::now() + time_budget)
}

pub(crate) fn master_solve_until(instance: &Instance, pool: &CutPool, deadline: Instant) -> MasterOutcome {
    let c = Compiled::new(instance);
    let mut m = Master::new(&c, pool, deadline);
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
    // the root frame is always on the interrupted path, so its bound covers
    // every unexplored node
    let upper_bound = if complete {
        m.best
    } else {
        m.best.max(m.interrupted_bound)
    };
    MasterOutcome {
        status: if complete {
            SolveStatus::Optimal
        } else {
            SolveStatus::TimeLimit
        },
        assignment: m
            .incumbent
            .unwrap_or_else(|| DayAssignment::unscheduled(instance)),
        objective: m.best,
        upper_bound,
        nodes: m.clock.nodes(),
    }
}

struct Master<'c, 'a> {
    c: &'c Compiled<'a>,
    state: DayState,
    // cuts touching each occurrence: (cut index, day)
    occ_cuts: Vec<Vec<(usize, Day)>>,
    cut_size: Vec<usize>,
    cut_matched: Vec<usize>,
    best: usize,
    incumbent: Option<DayAssignment>,
    clock: Clock,
    interrupted_bound: usize,
}

impl<'c, 'a> Master<'c, 'a> {
    fn new(c: &'c Compiled<'a>, pool: &CutPool, deadline: Instant) -> Self {
        let pos: HashMap<OccurrenceKey, usize> = c.occs.iter().enumerate().map(|(i, o)| (o.key, i)).collect();
        let mut occ_cuts = vec![Vec::new(); c.occs.len()];
        let mut cut_size = Vec::new();
        for cut in pool.iter() {
            // a cut naming an unknown occurrence can never be completed
            if !cut.group.iter().all(|k| pos.contains_key(k)) {
                continue;
            }
            let ci = cut_size.len();
            cut_size.push(cut.group.len());
            for k in &cut.group {
                occ_cuts[pos[k]].push((ci, cut.day));
            }
        }
        Self {
            c,
            state: DayState::new(c),
            occ_cuts,
            cut_matched: vec![0; cut_size.len()],
            cut_size,
            best: 0,
            incumbent: None,
            clock: Clock::new(deadline),
            interrupted_bound: 0,
        }
    }

    fn completes_cut(&self, occ: usize, day: Day) -> bool {
        self.occ_cuts[occ]
            .iter()
            .any(|&(ci, d)| d == day && self.cut_matched[ci] + 1 == self.cut_size[ci])
    }

    fn placeable(&self, occ: usize, day: Day) -> bool {
        self.state.fits_capacity(self.c, occ, day)
            && !self.completes_cut(occ, day)
            && !self.state.conflicts(self.c, occ, day)
    }

    /// Scheduled so far plus open occurrences that still have a usable day.
    fn bound(&self, depth: usize) -> usize {
        let open = (depth..self.c.occs.len())
            .filter(|&i| self.c.occs[i].domain.iter().any(|&d| self.placeable(i, d)))
            .count();
        self.state.scheduled + open
    }

    fn place(&mut self, occ: usize, day: Day) {
        self.state.apply(self.c, occ, day);
        for &(ci, d) in &self.occ_cuts[occ] {
            if d == day {
                self.cut_matched[ci] += 1;
            }
        }
    }

    fn unplace(&mut self, occ: usize, day: Day) {
        for &(ci, d) in &self.occ_cuts[occ] {
            if d == day {
                self.cut_matched[ci] -= 1;
            }
        }
        self.state.undo(self.c, occ, day);
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
            if !self.placeable(depth, day) {
                continue;
            }
            self.place(depth, day);
            if self.state.necessity_ok(self.c, patient) {
                self.dfs(depth + 1);
            }
            self.unplace(depth, day);
            if self.clock.expired {
                self.interrupted_bound = self.interrupted_bound.max(bound);
                return;
            }
            if self.bound(depth) <= self.best {
                return;
            }
        }
        self.state.vals[depth] = Val::Unscheduled;
        if self.state.necessity_ok(self.c, patient) {
            self.dfs(depth + 1);
        }
        self.state.vals[depth] = Val::Open;
        if self.clock.expired {
            self.interrupted_bound = self.interrupted_bound.max(bound);
        }
    }
}
