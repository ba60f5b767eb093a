//! Day-granularity search state shared by the master and monolithic solvers:
//! dense indexing of the instance plus incremental interdiction, necessity
//! and care-unit load bookkeeping.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::model::{Day, DayAssignment, Instance, OccurrenceKey, PatientId, ServiceId};

pub(crate) struct Occ {
    pub key: OccurrenceKey,
    pub patient: usize,
    pub services: Vec<usize>,
    /// Candidate days, ideal date first then outward (earlier day on ties).
    pub domain: Vec<Day>,
}

pub(crate) struct Compiled<'a> {
    pub instance: &'a Instance,
    pub horizon: Day,
    /// Occurrences in branching order.
    pub occs: Vec<Occ>,
    pub patients: Vec<PatientId>,
    pub patient_occs: Vec<Vec<usize>>,
    pub service_ids: Vec<ServiceId>,
    pub service_unit: Vec<usize>,
    pub service_duration: Vec<u32>,
    pub n_units: usize,
    /// Total shift time per `day * n_units + unit`.
    pub capacity: Vec<u32>,
    interdict_from: Vec<Vec<(usize, u32)>>,
    exclude_from: Vec<Vec<(usize, u32)>>,
    need_from: Vec<Vec<(usize, u32, u32)>>,
    has_pair_rules: Vec<bool>,
}

impl<'a> Compiled<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let horizon = instance.horizon_days;
        let unit_idx: HashMap<_, _> = instance
            .care_units
            .iter()
            .enumerate()
            .map(|(i, u)| (*u, i))
            .collect();
        let n_units = instance.care_units.len();
        let service_idx: HashMap<_, _> = instance
            .services
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id, i))
            .collect();
        let service_ids = instance.services.iter().map(|s| s.id).collect();
        let service_unit = instance.services.iter().map(|s| unit_idx[&s.care_unit]).collect();
        let service_duration = instance.services.iter().map(|s| s.duration).collect();

        let mut capacity = vec![0; (horizon as usize + 1) * n_units];
        for s in &instance.shifts {
            capacity[s.day as usize * n_units + unit_idx[&s.care_unit]] += s.duration;
        }

        let n_services = instance.services.len();
        let mut interdict_from = vec![Vec::new(); n_services];
        let mut exclude_from = vec![Vec::new(); n_services];
        let mut need_from = vec![Vec::new(); n_services];
        let mut has_pair_rules = vec![false; n_services];
        for r in &instance.interdictions {
            let (a, b) = (service_idx[&r.trigger], service_idx[&r.blocked]);
            interdict_from[a].push((b, r.n_days));
            has_pair_rules[a] = true;
            has_pair_rules[b] = true;
        }
        for r in &instance.necessities {
            let (a, b) = (service_idx[&r.trigger], service_idx[&r.required]);
            need_from[a].push((b, r.d_min, r.d_max));
            if r.d_min > 0 {
                exclude_from[a].push((b, r.d_min));
                has_pair_rules[a] = true;
                has_pair_rules[b] = true;
            }
        }

        let patient_set: BTreeSet<PatientId> = instance.occurrences.iter().map(|o| o.patient).collect();
        let patients: Vec<PatientId> = patient_set.into_iter().collect();
        let patient_idx: HashMap<_, _> = patients.iter().enumerate().map(|(i, p)| (*p, i)).collect();

        let mut raw: Vec<_> = instance.occurrences.iter().collect();
        raw.sort_by_key(|o| {
            let w = o.window(horizon);
            (*w.start(), *w.end(), o.key())
        });
        let occs: Vec<Occ> = raw
            .into_iter()
            .map(|o| {
                let mut domain: Vec<Day> = o.window(horizon).collect();
                domain.sort_by_key(|d| (d.abs_diff(o.ideal_date), *d));
                Occ {
                    key: o.key(),
                    patient: patient_idx[&o.patient],
                    services: o.services.iter().map(|s| service_idx[s]).collect(),
                    domain,
                }
            })
            .collect();
        let mut patient_occs = vec![Vec::new(); patients.len()];
        for (i, o) in occs.iter().enumerate() {
            patient_occs[o.patient].push(i);
        }
        let mut occs = occs;
        filter_unmeetable_necessities(&mut occs, &patient_occs, &need_from, horizon);

        Self {
            instance,
            horizon,
            occs,
            patients,
            patient_occs,
            service_ids,
            service_unit,
            service_duration,
            n_units,
            capacity,
            interdict_from,
            exclude_from,
            need_from,
            has_pair_rules,
        }
    }

    /// Whether two distinct deliveries of one patient break an interdiction
    /// or a necessity exclusion.
    fn pair_forbidden(&self, (s1, d1): (usize, Day), (s2, d2): (usize, Day)) -> bool {
        let hit = |(a, da): (usize, Day), (b, db): (usize, Day)| {
            self.interdict_from[a]
                .iter()
                .any(|&(blk, n)| blk == b && db >= da && db <= da + n)
                || self.exclude_from[a]
                    .iter()
                    .any(|&(req, dmin)| req == b && da < db && db <= da + dmin)
        };
        hit((s1, d1), (s2, d2)) || hit((s2, d2), (s1, d1))
    }
}

/// Drops every day on which an occurrence would trigger a necessity that no
/// occurrence of the same patient can meet, until nothing changes.
fn filter_unmeetable_necessities(
    occs: &mut [Occ],
    patient_occs: &[Vec<usize>],
    need_from: &[Vec<(usize, u32, u32)>],
    horizon: Day,
) {
    loop {
        let mut changed = false;
        for i in 0..occs.len() {
            let keep: Vec<Day> = occs[i]
                .domain
                .iter()
                .copied()
                .filter(|&d| {
                    occs[i].services.iter().all(|&s| {
                        need_from[s].iter().all(|&(req, dmin, dmax)| {
                            if d + dmax > horizon {
                                return true;
                            }
                            let (lo, hi) = (d + dmin, d + dmax);
                            patient_occs[occs[i].patient].iter().any(|&j| {
                                occs[j].services.contains(&req)
                                    && if j == i {
                                        dmin == 0
                                    } else {
                                        occs[j].domain.iter().any(|&e| e >= lo && e <= hi)
                                    }
                            })
                        })
                    })
                })
                .collect();
            if keep.len() != occs[i].domain.len() {
                occs[i].domain = keep;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Val {
    Open,
    Unscheduled,
    Day(Day),
}

pub(crate) struct DayState {
    pub vals: Vec<Val>,
    pub scheduled: usize,
    n_services: usize,
    days: usize,
    count: Vec<u16>,
    placements: Vec<Vec<(usize, Day)>>,
    pub load: Vec<u32>,
}

impl DayState {
    pub fn new(c: &Compiled) -> Self {
        let n_services = c.service_ids.len();
        let days = c.horizon as usize + 1;
        Self {
            vals: vec![Val::Open; c.occs.len()],
            scheduled: 0,
            n_services,
            days,
            count: vec![0; c.patients.len() * n_services * days],
            placements: vec![Vec::new(); c.patients.len()],
            load: vec![0; days * c.n_units],
        }
    }

    fn idx(&self, patient: usize, service: usize, day: Day) -> usize {
        (patient * self.n_services + service) * self.days + day as usize
    }

    pub fn delivered(&self, patient: usize, service: usize, day: Day) -> bool {
        self.count[self.idx(patient, service, day)] > 0
    }

    /// Interdiction / exclusion conflicts of placing `occ` on `day`.
    pub fn conflicts(&self, c: &Compiled, occ: usize, day: Day) -> bool {
        let o = &c.occs[occ];
        let p = o.patient;
        for (k, &s) in o.services.iter().enumerate() {
            if !c.has_pair_rules[s] || self.delivered(p, s, day) {
                continue;
            }
            for &(s2, d2) in &self.placements[p] {
                if c.pair_forbidden((s, day), (s2, d2)) {
                    return true;
                }
            }
            for &s2 in &o.services[k + 1..] {
                if !self.delivered(p, s2, day) && c.pair_forbidden((s, day), (s2, day)) {
                    return true;
                }
            }
        }
        false
    }

    /// Whether the per-day care-unit load stays within total shift time.
    pub fn fits_capacity(&self, c: &Compiled, occ: usize, day: Day) -> bool {
        let o = &c.occs[occ];
        let fresh = |s: &&usize| !self.delivered(o.patient, **s, day);
        o.services.iter().filter(fresh).all(|&s| {
            let u = c.service_unit[s];
            let added: u32 = o
                .services
                .iter()
                .filter(fresh)
                .filter(|&&t| c.service_unit[t] == u)
                .map(|&t| c.service_duration[t])
                .sum();
            let i = day as usize * c.n_units + u;
            self.load[i] + added <= c.capacity[i]
        })
    }

    pub fn apply(&mut self, c: &Compiled, occ: usize, day: Day) {
        let o = &c.occs[occ];
        for &s in &o.services {
            let i = self.idx(o.patient, s, day);
            if self.count[i] == 0 {
                self.placements[o.patient].push((s, day));
                self.load[day as usize * c.n_units + c.service_unit[s]] += c.service_duration[s];
            }
            self.count[i] += 1;
        }
        self.vals[occ] = Val::Day(day);
        self.scheduled += 1;
    }

    pub fn undo(&mut self, c: &Compiled, occ: usize, day: Day) {
        let o = &c.occs[occ];
        for &s in o.services.iter().rev() {
            let i = self.idx(o.patient, s, day);
            self.count[i] -= 1;
            if self.count[i] == 0 {
                let popped = self.placements[o.patient].pop();
                debug_assert_eq!(popped, Some((s, day)));
                self.load[day as usize * c.n_units + c.service_unit[s]] -= c.service_duration[s];
            }
        }
        self.vals[occ] = Val::Open;
        self.scheduled -= 1;
    }

    /// Every necessity triggered by a delivery of `patient` is either met,
    /// beyond the horizon, or still satisfiable by an open occurrence.
    pub fn necessity_ok(&self, c: &Compiled, patient: usize) -> bool {
        for &(s1, d1) in &self.placements[patient] {
            for &(req, dmin, dmax) in &c.need_from[s1] {
                if d1 + dmax > c.horizon {
                    continue;
                }
                let lo = d1 + dmin;
                let hi = d1 + dmax;
                if (lo..=hi).any(|d| self.delivered(patient, req, d)) {
                    continue;
                }
                let possible = c.patient_occs[patient].iter().any(|&oi| {
                    self.vals[oi] == Val::Open
                        && c.occs[oi].services.contains(&req)
                        && c.occs[oi].domain.iter().any(|&d| d >= lo && d <= hi)
                });
                if !possible {
                    return false;
                }
            }
        }
        true
    }

    /// (patient, service) deliveries currently placed on `day`.
    pub fn demand_on(&self, c: &Compiled, day: Day) -> Vec<(PatientId, ServiceId)> {
        let mut out = Vec::new();
        for (p, list) in self.placements.iter().enumerate() {
            for &(s, d) in list {
                if d == day {
                    out.push((c.patients[p], c.service_ids[s]));
                }
            }
        }
        out.sort();
        out
    }

    pub fn to_assignment(&self, c: &Compiled) -> DayAssignment {
        c.occs
            .iter()
            .zip(&self.vals)
            .map(|(o, v)| {
                let day = match v {
                    Val::Day(d) => Some(*d),
                    _ => None,
                };
                (o.key, day)
            })
            .collect()
    }
}

/// Cooperative wall-clock limit checked every few thousand nodes.
pub(crate) struct Clock {
    deadline: Instant,
    nodes: u64,
    pub expired: bool,
}

impl Clock {
    pub fn new(deadline: Instant) -> Self {
        Self {
            deadline,
            nodes: 0,
            expired: Instant::now() >= deadline,
        }
    }

    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) && Instant::now() >= self.deadline {
            self.expired = true;
        }
        self.expired
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }
}
