//! Exact feasibility check for one day's agenda.
//!
//! The search enumerates left-justified schedules: items are appended to
//! their operator's and patient's timelines in non-decreasing start order,
//! each starting as early as both timelines allow. Every feasible agenda can
//! be shifted left into such a schedule without breaking a constraint, so
//! exhausting the enumeration proves infeasibility.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use crate::error::ModelError;
use crate::model::{
    service_placements, AgendaEntry, CareUnitId, DailySchedule, Day, DayAssignment, Instance, OperatorId,
    OperatorShift, PatientId, ServiceId, Slot,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandItem {
    pub patient: PatientId,
    pub service: ServiceId,
    pub care_unit: CareUnitId,
    pub duration: Slot,
}

/// Services the master placed on one day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayDemand {
    pub day: Day,
    pub items: Vec<DemandItem>,
}

impl DayDemand {
    pub fn from_assignment(
        instance: &Instance,
        assignment: &DayAssignment,
        day: Day,
    ) -> Result<Self, ModelError> {
        let placements = service_placements(instance, assignment)?;
        Self::from_placements(
            instance,
            day,
            placements.iter().filter(|p| p.2 == day).map(|p| (p.0, p.1)),
        )
    }

    pub(crate) fn from_placements(
        instance: &Instance,
        day: Day,
        pairs: impl IntoIterator<Item = (PatientId, ServiceId)>,
    ) -> Result<Self, ModelError> {
        let items = pairs
            .into_iter()
            .map(|(patient, service)| {
                let def = instance
                    .service(service)
                    .ok_or_else(|| ModelError::Input(format!("unknown service {service}")))?;
                Ok(DemandItem {
                    patient,
                    service,
                    care_unit: def.care_unit,
                    duration: def.duration,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Self { day, items })
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpOutcome {
    Feasible(DailySchedule),
    Infeasible,
}

impl SpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

/// Decides whether `demand` can be served by the operators of `shifts`.
/// Shifts of other days are ignored.
pub fn sp_solve(demand: &DayDemand, shifts: &[OperatorShift]) -> SpOutcome {
    sp_solve_until(demand, shifts, None).expect("no deadline")
}

/// As [`sp_solve`], giving up with `None` once `deadline` passes.
pub fn sp_solve_until(
    demand: &DayDemand,
    shifts: &[OperatorShift],
    deadline: Option<Instant>,
) -> Option<SpOutcome> {
    let mut search = match Search::new(demand, shifts) {
        Some(s) => s,
        None => return Some(SpOutcome::Infeasible),
    };
    search.deadline = deadline;
    if search.dfs() {
        Some(SpOutcome::Feasible(search.schedule(demand.day)))
    } else if search.timed_out {
        None
    } else {
        Some(SpOutcome::Infeasible)
    }
}

struct Operator {
    care_unit: CareUnitId,
    id: OperatorId,
    end: Slot,
}

struct Item {
    patient: usize,
    patient_id: PatientId,
    service: ServiceId,
    unit: usize,
    duration: Slot,
}

struct Search {
    items: Vec<Item>,
    ops: Vec<Operator>,
    ops_by_unit: Vec<Vec<usize>>,
    // earliest free slot of each operator / patient timeline
    op_free: Vec<Slot>,
    patient_free: Vec<Slot>,
    placed: Vec<Option<(usize, Slot)>>,
    remaining: usize,
    unit_load: Vec<u32>,
    patient_load: Vec<u32>,
    patient_horizon: Vec<Slot>,
    floor: Slot,
    last: Option<usize>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl Search {
    /// `None` when some item's care unit has no working operator.
    fn new(demand: &DayDemand, shifts: &[OperatorShift]) -> Option<Self> {
        let unique: BTreeMap<(PatientId, ServiceId), &DemandItem> =
            demand.items.iter().map(|i| ((i.patient, i.service), i)).collect();
        let units: BTreeSet<CareUnitId> = unique.values().map(|i| i.care_unit).collect();
        let units: Vec<CareUnitId> = units.into_iter().collect();
        let unit_idx: HashMap<CareUnitId, usize> = units.iter().enumerate().map(|(i, u)| (*u, i)).collect();

        let mut day_shifts: Vec<&OperatorShift> = shifts
            .iter()
            .filter(|s| s.day == demand.day && s.duration > 0 && unit_idx.contains_key(&s.care_unit))
            .collect();
        day_shifts.sort_by_key(|s| (s.care_unit, s.operator));
        let mut ops = Vec::new();
        let mut ops_by_unit = vec![Vec::new(); units.len()];
        let mut op_free = Vec::new();
        for s in day_shifts {
            ops_by_unit[unit_idx[&s.care_unit]].push(ops.len());
            ops.push(Operator {
                care_unit: s.care_unit,
                id: s.operator,
                end: s.end(),
            });
            op_free.push(s.start);
        }
        if ops_by_unit.iter().any(|o| o.is_empty()) {
            return None;
        }

        let patients: BTreeSet<PatientId> = unique.keys().map(|k| k.0).collect();
        let patient_idx: HashMap<PatientId, usize> =
            patients.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut items: Vec<Item> = unique
            .values()
            .map(|i| Item {
                patient: patient_idx[&i.patient],
                patient_id: i.patient,
                service: i.service,
                unit: unit_idx[&i.care_unit],
                duration: i.duration,
            })
            .collect();
        // longest first; ties by (patient, service) for a canonical order
        items.sort_by(|a, b| {
            b.duration
                .cmp(&a.duration)
                .then(a.patient_id.cmp(&b.patient_id))
                .then(a.service.cmp(&b.service))
        });

        let mut unit_load = vec![0; units.len()];
        let mut patient_load = vec![0; patients.len()];
        let mut patient_horizon = vec![0; patients.len()];
        for it in &items {
            unit_load[it.unit] += it.duration;
            patient_load[it.patient] += it.duration;
            let unit_end = ops_by_unit[it.unit]
                .iter()
                .map(|&o| ops[o].end)
                .max()
                .unwrap_or(0);
            patient_horizon[it.patient] = patient_horizon[it.patient].max(unit_end);
        }

        Some(Self {
            remaining: items.len(),
            placed: vec![None; items.len()],
            items,
            ops,
            ops_by_unit,
            op_free,
            patient_free: vec![0; patients.len()],
            unit_load,
            patient_load,
            patient_horizon,
            floor: 0,
            last: None,
            nodes: 0,
            deadline: None,
            timed_out: false,
        })
    }

    fn hopeless(&self) -> bool {
        let floor = self.floor;
        for (u, ops) in self.ops_by_unit.iter().enumerate() {
            let avail: u32 = ops
                .iter()
                .map(|&o| self.ops[o].end.saturating_sub(self.op_free[o].max(floor)))
                .sum();
            if self.unit_load[u] > avail {
                return true;
            }
        }
        for p in 0..self.patient_load.len() {
            if self.patient_load[p] > 0
                && self.patient_free[p].max(floor) + self.patient_load[p] > self.patient_horizon[p]
            {
                return true;
            }
        }
        for (i, it) in self.items.iter().enumerate() {
            if self.placed[i].is_some() {
                continue;
            }
            let fits = self.ops_by_unit[it.unit].iter().any(|&o| {
                self.op_free[o].max(self.patient_free[it.patient]).max(floor) + it.duration <= self.ops[o].end
            });
            if !fits {
                return true;
            }
        }
        false
    }

    fn dfs(&mut self) -> bool {
        if self.remaining == 0 {
            return true;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out || self.hopeless() {
            return false;
        }

        for i in 0..self.items.len() {
            if self.placed[i].is_some() {
                continue;
            }
            let (patient, unit, duration) = {
                let it = &self.items[i];
                (it.patient, it.unit, it.duration)
            };
            let mut tried: Vec<(Slot, Slot)> = Vec::new();
            for k in 0..self.ops_by_unit[unit].len() {
                let o = self.ops_by_unit[unit][k];
                // operators in the same state are interchangeable
                let state = (self.op_free[o], self.ops[o].end);
                if tried.contains(&state) {
                    continue;
                }
                tried.push(state);

                let start = self.op_free[o].max(self.patient_free[patient]);
                if start < self.floor || (start == self.floor && self.last.is_some_and(|l| i < l)) {
                    continue;
                }
                if start + duration > self.ops[o].end {
                    continue;
                }

                let saved = (self.op_free[o], self.patient_free[patient], self.floor, self.last);
                self.op_free[o] = start + duration;
                self.patient_free[patient] = start + duration;
                self.floor = start;
                self.last = Some(i);
                self.placed[i] = Some((o, start));
                self.remaining -= 1;
                self.unit_load[unit] -= duration;
                self.patient_load[patient] -= duration;

                if self.dfs() {
                    return true;
                }

                self.unit_load[unit] += duration;
                self.patient_load[patient] += duration;
                self.remaining += 1;
                self.placed[i] = None;
                (self.op_free[o], self.patient_free[patient], self.floor, self.last) = saved;
                if self.timed_out {
                    return false;
                }
            }
        }
        false
    }

    fn schedule(&self, day: Day) -> DailySchedule {
        let mut out = DailySchedule::empty(day);
        for (it, placed) in self.items.iter().zip(&self.placed) {
            let (o, start) = placed.expect("complete schedule");
            debug_assert_eq!(
                self.ops[o].care_unit,
                self.ops[self.ops_by_unit[it.unit][0]].care_unit
            );
            out.entries.insert(
                (it.patient_id, it.service),
                AgendaEntry {
                    operator: self.ops[o].id,
                    start,
                },
            );
        }
        out
    }
}
