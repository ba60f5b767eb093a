//! Independent checker for complete solutions.
//!
//! Deliberately naive: every constraint is re-evaluated pairwise from the
//! raw instance, sharing no code with the solvers' incremental propagation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::ModelError;
use crate::model::{
    service_placements, within_tolerance, CareUnitId, DailySchedule, Day, DayAssignment, FullSolution,
    Instance, OperatorId, OperatorShift, PatientId, ServiceId, Slot,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    Tolerance,
    Interdiction,
    NecessityWindow,
    NecessityExclusion,
    PatientOverlap,
    OperatorOverlap,
    ShiftContainment,
    WrongCareUnit,
    /// The assignment and the daily agendas disagree on a delivery.
    MissingAgendaEntry,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Tolerance => "tolerance",
            Self::Interdiction => "interdiction",
            Self::NecessityWindow => "necessity-window",
            Self::NecessityExclusion => "necessity-exclusion",
            Self::PatientOverlap => "patient-overlap",
            Self::OperatorOverlap => "operator-overlap",
            Self::ShiftContainment => "shift-containment",
            Self::WrongCareUnit => "wrong-care-unit",
            Self::MissingAgendaEntry => "missing-agenda-entry",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    pub patient: Option<PatientId>,
    pub day: Option<Day>,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, patient: PatientId, day: Day, detail: String) -> Self {
        Self {
            kind,
            patient: Some(patient),
            day: Some(day),
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(p) = self.patient {
            write!(f, " {p}")?;
        }
        if let Some(d) = self.day {
            write!(f, " day {d}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks every constraint of the problem. Returns the violations in
/// canonical (kind, patient, day) order; an empty vector means the solution
/// is feasible.
pub fn verify_solution(instance: &Instance, solution: &FullSolution) -> Result<Vec<Violation>, ModelError> {
    let mut out = check_assignment(instance, &solution.assignment)?;
    let placements = service_placements(instance, &solution.assignment)?;

    let mut seen: BTreeMap<(PatientId, ServiceId, Day), usize> = BTreeMap::new();
    for agenda in &solution.agendas {
        for &(p, s) in agenda.entries.keys() {
            *seen.entry((p, s, agenda.day)).or_default() += 1;
        }
        out.extend(check_agenda(instance, agenda)?);
    }
    for &(p, s, d) in &placements {
        match seen.get(&(p, s, d)).copied().unwrap_or(0) {
            0 => out.push(Violation::new(
                ViolationKind::MissingAgendaEntry,
                p,
                d,
                format!("{s} is scheduled but has no agenda entry"),
            )),
            1 => {}
            n => out.push(Violation::new(
                ViolationKind::MissingAgendaEntry,
                p,
                d,
                format!("{s} appears in {n} agendas"),
            )),
        }
    }
    for &(p, s, d) in seen.keys() {
        if !placements.contains(&(p, s, d)) {
            out.push(Violation::new(
                ViolationKind::MissingAgendaEntry,
                p,
                d,
                format!("agenda entry for {s} has no scheduled packet"),
            ));
        }
    }
    out.sort();
    Ok(out)
}

/// Day-granularity checks only: tolerance, interdiction and necessity.
pub fn check_assignment(
    instance: &Instance,
    assignment: &DayAssignment,
) -> Result<Vec<Violation>, ModelError> {
    let mut out = Vec::new();
    for (key, day) in assignment.iter() {
        let Some(day) = day else { continue };
        let occ = instance
            .occurrence(key)
            .ok_or(ModelError::UnknownOccurrence(*key))?;
        if day < 1 || day > instance.horizon_days || !within_tolerance(day, occ.ideal_date, occ.tolerance) {
            out.push(Violation::new(
                ViolationKind::Tolerance,
                key.patient,
                day,
                format!("{key} on day {day}, ideal {} ± {}", occ.ideal_date, occ.tolerance),
            ));
        }
    }

    let placements = service_placements(instance, assignment)?;
    let mut by_patient: BTreeMap<PatientId, Vec<(ServiceId, Day)>> = BTreeMap::new();
    for &(p, s, d) in &placements {
        by_patient.entry(p).or_default().push((s, d));
    }
    let horizon = instance.horizon_days;

    for (&p, items) in &by_patient {
        for r in &instance.interdictions {
            for &(s1, d1) in items.iter().filter(|(s, _)| *s == r.trigger) {
                for &(s2, d2) in items.iter().filter(|(s, _)| *s == r.blocked) {
                    // a delivery never interdicts itself
                    if (s1, d1) == (s2, d2) {
                        continue;
                    }
                    if d2 >= d1 && d2 <= d1 + r.n_days {
                        out.push(Violation::new(
                            ViolationKind::Interdiction,
                            p,
                            d2,
                            format!("{s1} on day {d1} interdicts {s2} for {} days", r.n_days),
                        ));
                    }
                }
            }
        }
        for r in &instance.necessities {
            for &(_, d1) in items.iter().filter(|(s, _)| *s == r.trigger) {
                let required: Vec<Day> = items
                    .iter()
                    .filter(|(s, _)| *s == r.required)
                    .map(|&(_, d)| d)
                    .collect();
                if d1 + r.d_max <= horizon
                    && !required
                        .iter()
                        .any(|&d2| d2 >= d1 + r.d_min && d2 <= d1 + r.d_max)
                {
                    out.push(Violation::new(
                        ViolationKind::NecessityWindow,
                        p,
                        d1,
                        format!(
                            "{} on day {d1} requires {} within days {}..={}",
                            r.trigger,
                            r.required,
                            d1 + r.d_min,
                            d1 + r.d_max
                        ),
                    ));
                }
                for &d2 in &required {
                    if d1 < d2 && d2 <= d1 + r.d_min {
                        out.push(Violation::new(
                            ViolationKind::NecessityExclusion,
                            p,
                            d2,
                            format!(
                                "{} on day {d2} is too close to {} on day {d1} (d_min {})",
                                r.required, r.trigger, r.d_min
                            ),
                        ));
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn overlaps(a: (Slot, Slot), b: (Slot, Slot)) -> bool {
    a.0 < b.0 + b.1 && b.0 < a.0 + a.1
}

/// Daily-agenda checks for one day: operator/care-unit match, shift
/// containment, and no overlaps per patient or per operator.
pub fn check_agenda(instance: &Instance, agenda: &DailySchedule) -> Result<Vec<Violation>, ModelError> {
    let day = agenda.day;
    let shifts: HashMap<(CareUnitId, OperatorId), &OperatorShift> = instance
        .shifts
        .iter()
        .filter(|s| s.day == day)
        .map(|s| ((s.care_unit, s.operator), s))
        .collect();

    let mut out = Vec::new();
    let mut timed: Vec<(PatientId, ServiceId, CareUnitId, OperatorId, Slot, Slot)> = Vec::new();
    for (&(p, s), entry) in &agenda.entries {
        let def = instance.service(s).ok_or_else(|| {
            ModelError::Input(format!("agenda for day {day} references unknown service {s}"))
        })?;
        match shifts.get(&(def.care_unit, entry.operator)) {
            None => out.push(Violation::new(
                ViolationKind::WrongCareUnit,
                p,
                day,
                format!("{} has no shift at {} for {s}", entry.operator, def.care_unit),
            )),
            Some(shift) => {
                if entry.start < shift.start || entry.start + def.duration > shift.end() {
                    out.push(Violation::new(
                        ViolationKind::ShiftContainment,
                        p,
                        day,
                        format!(
                            "{s} at [{}, {}) outside shift [{}, {}) of {} {}",
                            entry.start,
                            entry.start + def.duration,
                            shift.start,
                            shift.end(),
                            def.care_unit,
                            entry.operator
                        ),
                    ));
                }
            }
        }
        timed.push((p, s, def.care_unit, entry.operator, entry.start, def.duration));
    }

    for (i, a) in timed.iter().enumerate() {
        for b in &timed[i + 1..] {
            if !overlaps((a.4, a.5), (b.4, b.5)) {
                continue;
            }
            if a.0 == b.0 {
                out.push(Violation::new(
                    ViolationKind::PatientOverlap,
                    a.0,
                    day,
                    format!("{} and {} overlap", a.1, b.1),
                ));
            } else if (a.2, a.3) == (b.2, b.3) {
                out.push(Violation::new(
                    ViolationKind::OperatorOverlap,
                    a.0,
                    day,
                    format!(
                        "{} {} serves {}/{} and {}/{} at once",
                        a.2, a.3, a.0, a.1, b.0, b.1
                    ),
                ));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Set of violation kinds, handy in tests.
pub fn kinds(violations: &[Violation]) -> BTreeSet<ViolationKind> {
    violations.iter().map(|v| v.kind).collect()
}
