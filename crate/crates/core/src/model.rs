//! Domain types shared by every solver.
//!
//! Days are numbered `1..=horizon_days`; start slots range over
//! `0..slots_per_day`. Operators are identified by the pair
//! `(care unit, operator id)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub type Day = u32;
pub type Slot = u32;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(PatientId, "p");
id_type!(PacketId, "pck");
id_type!(ServiceId, "s");
id_type!(CareUnitId, "cu");
id_type!(
    /// Operator number, unique within its care unit.
    OperatorId,
    "op"
);

/// Identifies one periodic repetition of a patient's packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OccurrenceKey {
    pub patient: PatientId,
    pub packet: PacketId,
    pub occurrence: u32,
}

impl OccurrenceKey {
    pub fn new(patient: u32, packet: u32, occurrence: u32) -> Self {
        Self {
            patient: PatientId(patient),
            packet: PacketId(packet),
            occurrence,
        }
    }
}

impl fmt::Display for OccurrenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}#{}", self.patient, self.packet, self.occurrence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceDef {
    pub id: ServiceId,
    pub care_unit: CareUnitId,
    pub duration: Slot,
}

/// Working shift of one operator on one day. A zero duration means the
/// operator is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorShift {
    pub day: Day,
    pub care_unit: CareUnitId,
    pub operator: OperatorId,
    pub start: Slot,
    pub duration: Slot,
}

impl OperatorShift {
    pub fn end(&self) -> Slot {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketOccurrence {
    pub patient: PatientId,
    pub packet: PacketId,
    pub occurrence: u32,
    pub ideal_date: Day,
    pub tolerance: u32,
    pub services: Vec<ServiceId>,
}

impl PacketOccurrence {
    pub fn key(&self) -> OccurrenceKey {
        OccurrenceKey {
            patient: self.patient,
            packet: self.packet,
            occurrence: self.occurrence,
        }
    }

    /// Days of the horizon inside the tolerance window, ascending.
    pub fn window(&self, horizon_days: Day) -> std::ops::RangeInclusive<Day> {
        let lo = self.ideal_date.saturating_sub(self.tolerance).max(1);
        let hi = (self.ideal_date + self.tolerance).min(horizon_days);
        lo..=hi
    }
}

/// Scheduling `trigger` on day `d` forbids `blocked` on days `d..=d + n_days`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterdictionRule {
    pub trigger: ServiceId,
    pub blocked: ServiceId,
    pub n_days: u32,
}

/// Scheduling `trigger` on day `d` requires `required` on some day of
/// `d + d_min..=d + d_max`, and forbids it on `d + 1..=d + d_min`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessityRule {
    pub trigger: ServiceId,
    pub required: ServiceId,
    pub d_min: u32,
    pub d_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub horizon_days: Day,
    pub slots_per_day: Slot,
    pub services: Vec<ServiceDef>,
    pub care_units: Vec<CareUnitId>,
    pub shifts: Vec<OperatorShift>,
    pub occurrences: Vec<PacketOccurrence>,
    pub interdictions: Vec<InterdictionRule>,
    pub necessities: Vec<NecessityRule>,
}

impl Instance {
    pub fn service(&self, id: ServiceId) -> Option<&ServiceDef> {
        self.services.iter().find(|s| s.id == id)
    }

    pub fn occurrence(&self, key: &OccurrenceKey) -> Option<&PacketOccurrence> {
        self.occurrences.iter().find(|o| o.key() == *key)
    }

    /// Shifts of `day`, in (care unit, operator) order.
    pub fn shifts_on(&self, day: Day) -> Vec<OperatorShift> {
        let mut out: Vec<_> = self.shifts.iter().filter(|s| s.day == day).cloned().collect();
        out.sort_by_key(|s| (s.care_unit, s.operator));
        out
    }

    /// Total shift time of `care_unit` on `day`.
    pub fn capacity(&self, day: Day, care_unit: CareUnitId) -> u32 {
        self.shifts
            .iter()
            .filter(|s| s.day == day && s.care_unit == care_unit)
            .map(|s| s.duration)
            .sum()
    }

    /// Total number of service deliveries requested by all occurrences.
    pub fn services_to_schedule(&self) -> usize {
        self.occurrences.iter().map(|o| o.services.len()).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.horizon_days == 0 {
            return Err(ModelError::invalid("horizon_days", "must be positive"));
        }
        if self.slots_per_day == 0 {
            return Err(ModelError::invalid("slots_per_day", "must be positive"));
        }
        let units: HashSet<CareUnitId> = self.care_units.iter().copied().collect();
        if units.len() != self.care_units.len() {
            return Err(ModelError::invalid("care_units", "duplicate care unit"));
        }
        let mut services = HashMap::new();
        for (i, s) in self.services.iter().enumerate() {
            if s.duration == 0 {
                return Err(ModelError::invalid(
                    format!("services[{i}].duration"),
                    "must be at least 1",
                ));
            }
            if !units.contains(&s.care_unit) {
                return Err(ModelError::invalid(
                    format!("services[{i}].care_unit"),
                    format!("unknown care unit {}", s.care_unit),
                ));
            }
            if services.insert(s.id, s).is_some() {
                return Err(ModelError::invalid(
                    format!("services[{i}].id"),
                    format!("duplicate service {}", s.id),
                ));
            }
        }
        let mut operators = HashSet::new();
        for (i, s) in self.shifts.iter().enumerate() {
            if s.day < 1 || s.day > self.horizon_days {
                return Err(ModelError::invalid(
                    format!("shifts[{i}].day"),
                    format!("day {} outside 1..={}", s.day, self.horizon_days),
                ));
            }
            if !units.contains(&s.care_unit) {
                return Err(ModelError::invalid(
                    format!("shifts[{i}].care_unit"),
                    format!("unknown care unit {}", s.care_unit),
                ));
            }
            if s.end() > self.slots_per_day {
                return Err(ModelError::invalid(
                    format!("shifts[{i}].duration"),
                    format!(
                        "shift ends at {} past slots_per_day {}",
                        s.end(),
                        self.slots_per_day
                    ),
                ));
            }
            if !operators.insert((s.day, s.care_unit, s.operator)) {
                return Err(ModelError::invalid(
                    format!("shifts[{i}].operator"),
                    format!("second shift for {} {} on day {}", s.care_unit, s.operator, s.day),
                ));
            }
        }
        let mut keys = HashSet::new();
        let mut by_packet: BTreeMap<(PatientId, PacketId), Vec<&PacketOccurrence>> = BTreeMap::new();
        for (i, o) in self.occurrences.iter().enumerate() {
            if o.ideal_date < 1 || o.ideal_date > self.horizon_days {
                return Err(ModelError::invalid(
                    format!("occurrences[{i}].ideal_date"),
                    format!("day {} outside 1..={}", o.ideal_date, self.horizon_days),
                ));
            }
            if o.services.is_empty() {
                return Err(ModelError::invalid(
                    format!("occurrences[{i}].services"),
                    "packet has no services",
                ));
            }
            let mut seen = HashSet::new();
            for s in &o.services {
                if !services.contains_key(s) {
                    return Err(ModelError::invalid(
                        format!("occurrences[{i}].services"),
                        format!("unknown service {s}"),
                    ));
                }
                if !seen.insert(*s) {
                    return Err(ModelError::invalid(
                        format!("occurrences[{i}].services"),
                        format!("service {s} listed twice"),
                    ));
                }
            }
            if !keys.insert(o.key()) {
                return Err(ModelError::invalid(
                    format!("occurrences[{i}]"),
                    format!("duplicate occurrence {}", o.key()),
                ));
            }
            by_packet.entry((o.patient, o.packet)).or_default().push(o);
        }
        for occs in by_packet.values_mut() {
            occs.sort_by_key(|o| o.occurrence);
            for pair in occs.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                let a_hi = a.ideal_date as i64 + a.tolerance as i64;
                let b_lo = b.ideal_date as i64 - b.tolerance as i64;
                let b_hi = b.ideal_date as i64 + b.tolerance as i64;
                let a_lo = a.ideal_date as i64 - a.tolerance as i64;
                if a_hi >= b_lo && b_hi >= a_lo {
                    return Err(ModelError::invalid(
                        "occurrences",
                        format!("tolerance windows of {} and {} overlap", a.key(), b.key()),
                    ));
                }
            }
        }
        for (i, r) in self.interdictions.iter().enumerate() {
            for (field, s) in [("trigger", r.trigger), ("blocked", r.blocked)] {
                if !services.contains_key(&s) {
                    return Err(ModelError::invalid(
                        format!("interdictions[{i}].{field}"),
                        format!("unknown service {s}"),
                    ));
                }
            }
        }
        for (i, r) in self.necessities.iter().enumerate() {
            for (field, s) in [("trigger", r.trigger), ("required", r.required)] {
                if !services.contains_key(&s) {
                    return Err(ModelError::invalid(
                        format!("necessities[{i}].{field}"),
                        format!("unknown service {s}"),
                    ));
                }
            }
            if r.d_min > r.d_max {
                return Err(ModelError::invalid(
                    format!("necessities[{i}].d_min"),
                    format!("d_min {} exceeds d_max {}", r.d_min, r.d_max),
                ));
            }
        }
        Ok(())
    }
}

/// Master decision: every occurrence is mapped to a day or left unscheduled
/// (`None`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct DayAssignment {
    days: BTreeMap<OccurrenceKey, Option<Day>>,
}

impl DayAssignment {
    /// Every occurrence of `instance` left unscheduled.
    pub fn unscheduled(instance: &Instance) -> Self {
        Self {
            days: instance.occurrences.iter().map(|o| (o.key(), None)).collect(),
        }
    }

    pub fn set(&mut self, key: OccurrenceKey, day: Option<Day>) {
        self.days.insert(key, day);
    }

    pub fn get(&self, key: &OccurrenceKey) -> Option<Day> {
        self.days.get(key).copied().flatten()
    }

    pub fn contains(&self, key: &OccurrenceKey) -> bool {
        self.days.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccurrenceKey, Option<Day>)> + '_ {
        self.days.iter().map(|(k, d)| (k, *d))
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn scheduled_count(&self) -> usize {
        self.days.values().filter(|d| d.is_some()).count()
    }

    /// Days holding at least one occurrence, ascending.
    pub fn days_used(&self) -> BTreeSet<Day> {
        self.days.values().flatten().copied().collect()
    }

    /// Occurrences placed on `day`, in key order.
    pub fn on_day(&self, day: Day) -> Vec<OccurrenceKey> {
        self.days
            .iter()
            .filter(|(_, d)| **d == Some(day))
            .map(|(k, _)| *k)
            .collect()
    }
}

impl FromIterator<(OccurrenceKey, Option<Day>)> for DayAssignment {
    fn from_iter<I: IntoIterator<Item = (OccurrenceKey, Option<Day>)>>(iter: I) -> Self {
        Self {
            days: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgendaEntry {
    pub operator: OperatorId,
    pub start: Slot,
}

/// Timetable of one day: per (patient, service), the operator and start slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DailySchedule {
    pub day: Day,
    pub entries: BTreeMap<(PatientId, ServiceId), AgendaEntry>,
}

impl DailySchedule {
    pub fn empty(day: Day) -> Self {
        Self {
            day,
            entries: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullSolution {
    pub assignment: DayAssignment,
    pub agendas: Vec<DailySchedule>,
}

impl FullSolution {
    pub fn empty(instance: &Instance) -> Self {
        Self {
            assignment: DayAssignment::unscheduled(instance),
            agendas: Vec::new(),
        }
    }
}

/// `|day - ideal_date| <= tolerance`.
pub fn within_tolerance(day: Day, ideal_date: Day, tolerance: u32) -> bool {
    day.abs_diff(ideal_date) <= tolerance
}

/// Number of occurrences mapped to a day.
pub fn objective_value(instance: &Instance, assignment: &DayAssignment) -> Result<usize, ModelError> {
    let known: HashSet<OccurrenceKey> = instance.occurrences.iter().map(|o| o.key()).collect();
    let mut count = 0;
    for (key, day) in assignment.iter() {
        if !known.contains(key) {
            return Err(ModelError::UnknownOccurrence(*key));
        }
        if day.is_some() {
            count += 1;
        }
    }
    Ok(count)
}

/// The (patient, service, day) deliveries implied by an assignment. Two
/// packets of one patient sharing a service on the same day deliver it once.
pub fn service_placements(
    instance: &Instance,
    assignment: &DayAssignment,
) -> Result<BTreeSet<(PatientId, ServiceId, Day)>, ModelError> {
    let mut out = BTreeSet::new();
    for (key, day) in assignment.iter() {
        let Some(day) = day else { continue };
        let occ = instance
            .occurrence(key)
            .ok_or(ModelError::UnknownOccurrence(*key))?;
        for s in &occ.services {
            out.insert((occ.patient, *s, day));
        }
    }
    Ok(out)
}
