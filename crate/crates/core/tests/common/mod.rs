#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ncd_agenda::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small random instance: every occurrence is its own packet, so windows
/// never collide, and rules are drawn over the whole catalog.
pub fn random_small_instance(seed: u64, max_occurrences: usize, max_horizon: u32) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = rng.gen_range(1..=max_horizon);
    let slots = rng.gen_range(6..=10);
    let n_units = rng.gen_range(1..=2u32);
    let care_units: Vec<CareUnitId> = (1..=n_units).map(CareUnitId).collect();
    let services: Vec<ServiceDef> = (1..=rng.gen_range(1..=3u32))
        .map(|id| ServiceDef {
            id: ServiceId(id),
            care_unit: *care_units.choose(&mut rng).unwrap(),
            duration: rng.gen_range(1..=4),
        })
        .collect();
    let mut shifts = Vec::new();
    for day in 1..=horizon {
        for &cu in &care_units {
            for op in 1..=rng.gen_range(0..=2u32) {
                let start = rng.gen_range(0..slots);
                shifts.push(OperatorShift {
                    day,
                    care_unit: cu,
                    operator: OperatorId(op),
                    start,
                    duration: rng.gen_range(0..=slots - start),
                });
            }
        }
    }
    let occurrences = (1..=rng.gen_range(1..=max_occurrences as u32))
        .map(|packet| {
            let mut chosen: Vec<ServiceId> = services
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|s| s.id)
                .collect();
            if chosen.is_empty() {
                chosen.push(services.choose(&mut rng).unwrap().id);
            }
            PacketOccurrence {
                patient: PatientId(rng.gen_range(1..=2)),
                packet: PacketId(packet),
                occurrence: 0,
                ideal_date: rng.gen_range(1..=horizon),
                tolerance: rng.gen_range(0..=2),
                services: chosen,
            }
        })
        .collect();
    let pick = |rng: &mut ChaCha8Rng| services.choose(rng).unwrap().id;
    let interdictions = (0..rng.gen_range(0..=2))
        .map(|_| InterdictionRule {
            trigger: pick(&mut rng),
            blocked: pick(&mut rng),
            n_days: rng.gen_range(0..=2),
        })
        .collect();
    let necessities = (0..rng.gen_range(0..=2))
        .map(|_| {
            let d_min = rng.gen_range(0..=2);
            NecessityRule {
                trigger: pick(&mut rng),
                required: pick(&mut rng),
                d_min,
                d_max: d_min + rng.gen_range(0..=3),
            }
        })
        .collect();
    let inst = Instance {
        horizon_days: horizon,
        slots_per_day: slots,
        services,
        care_units,
        shifts,
        occurrences,
        interdictions,
        necessities,
    };
    inst.validate().expect("generated test instance is valid");
    inst
}

pub fn random_cut_pool(inst: &Instance, seed: u64, max_cuts: usize) -> CutPool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<OccurrenceKey> = inst.occurrences.iter().map(|o| o.key()).collect();
    let mut pool = CutPool::new();
    for gid in 1..=rng.gen_range(0..=max_cuts) as u64 {
        let mut group: BTreeSet<OccurrenceKey> = keys.iter().filter(|_| rng.gen_bool(0.5)).copied().collect();
        if group.is_empty() {
            group.insert(*keys.choose(&mut rng).unwrap());
        }
        let day = rng.gen_range(1..=inst.horizon_days);
        pool.add(NoGoodCut { day, group, gid }).unwrap();
    }
    pool
}

/// Every assignment of `inst`: each occurrence gets a day or `None`.
pub fn all_assignments(inst: &Instance) -> Vec<DayAssignment> {
    let mut out = vec![DayAssignment::default()];
    for o in &inst.occurrences {
        let mut next = Vec::new();
        for a in &out {
            for day in std::iter::once(None).chain((1..=inst.horizon_days).map(Some)) {
                let mut b = a.clone();
                b.set(o.key(), day);
                next.push(b);
            }
        }
        out = next;
    }
    out
}

/// Per (day, care unit) load with each (patient, service, day) counted once.
pub fn loads_fit(inst: &Instance, a: &DayAssignment) -> bool {
    let mut delivered = BTreeSet::new();
    for o in &inst.occurrences {
        if let Some(day) = a.get(&o.key()) {
            for s in &o.services {
                delivered.insert((o.patient, *s, day));
            }
        }
    }
    let mut load: BTreeMap<(Day, CareUnitId), u32> = BTreeMap::new();
    for (_, s, day) in delivered {
        let def = inst.services.iter().find(|d| d.id == s).unwrap();
        *load.entry((day, def.care_unit)).or_default() += def.duration;
    }
    load.into_iter().all(|((day, cu), l)| {
        let cap: u32 = inst
            .shifts
            .iter()
            .filter(|s| s.day == day && s.care_unit == cu)
            .map(|s| s.duration)
            .sum();
        l <= cap
    })
}

pub fn blocked_by_pool(pool: &CutPool, a: &DayAssignment) -> bool {
    pool.iter()
        .any(|c| c.group.iter().all(|k| a.get(k) == Some(c.day)))
}

/// Best master objective by enumeration over day-level rules, load and cuts.
pub fn enumerate_master(inst: &Instance, pool: &CutPool) -> usize {
    all_assignments(inst)
        .into_iter()
        .filter(|a| check_assignment(inst, a).unwrap().is_empty())
        .filter(|a| loads_fit(inst, a))
        .filter(|a| !blocked_by_pool(pool, a))
        .map(|a| a.scheduled_count())
        .max()
        .unwrap_or(0)
}

/// (patient, care unit, operator) tuples of an item list, placed by trying
/// every start of every shift.
pub fn exhaustive_fit(items: &[DemandItem], shifts: &[OperatorShift]) -> bool {
    fn go(
        items: &[DemandItem],
        shifts: &[OperatorShift],
        placed: &mut Vec<(PatientId, CareUnitId, OperatorId, u32, u32)>,
    ) -> bool {
        let Some((item, rest)) = items.split_first() else {
            return true;
        };
        for sh in shifts.iter().filter(|s| s.care_unit == item.care_unit) {
            let mut start = sh.start;
            while start + item.duration <= sh.start + sh.duration {
                let end = start + item.duration;
                let free = placed.iter().all(|&(p, cu, op, s, e)| {
                    let apart = end <= s || e <= start;
                    apart || (p != item.patient && (cu, op) != (sh.care_unit, sh.operator))
                });
                if free {
                    placed.push((item.patient, sh.care_unit, sh.operator, start, end));
                    if go(rest, shifts, placed) {
                        return true;
                    }
                    placed.pop();
                }
                start += 1;
            }
        }
        false
    }
    let mut unique: Vec<DemandItem> = Vec::new();
    for i in items {
        if !unique
            .iter()
            .any(|u| u.patient == i.patient && u.service == i.service)
        {
            unique.push(i.clone());
        }
    }
    go(&unique, shifts, &mut Vec::new())
}

/// Whether `schedule` serves every item of `demand` inside the shifts
/// without overlaps.
pub fn schedule_is_valid(demand: &DayDemand, shifts: &[OperatorShift], schedule: &DailySchedule) -> bool {
    let wanted: BTreeSet<(PatientId, ServiceId)> =
        demand.items.iter().map(|i| (i.patient, i.service)).collect();
    if schedule.entries.keys().copied().collect::<BTreeSet<_>>() != wanted {
        return false;
    }
    let mut spans = Vec::new();
    for (&(p, s), e) in &schedule.entries {
        let item = demand
            .items
            .iter()
            .find(|i| i.patient == p && i.service == s)
            .unwrap();
        let Some(sh) = shifts
            .iter()
            .find(|sh| sh.care_unit == item.care_unit && sh.operator == e.operator)
        else {
            return false;
        };
        if e.start < sh.start || e.start + item.duration > sh.start + sh.duration {
            return false;
        }
        spans.push((p, item.care_unit, e.operator, e.start, e.start + item.duration));
    }
    for (i, a) in spans.iter().enumerate() {
        for b in &spans[i + 1..] {
            let overlap = a.3 < b.4 && b.3 < a.4;
            if overlap && (a.0 == b.0 || (a.1, a.2) == (b.1, b.2)) {
                return false;
            }
        }
    }
    true
}

/// Random demand and shifts for a single day.
pub fn random_day(seed: u64, max_items: usize) -> (DayDemand, Vec<OperatorShift>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = rng.gen_range(4..=10u32);
    let units = [CareUnitId(1), CareUnitId(2)];
    let mut shifts = Vec::new();
    for cu in units {
        for op in 1..=rng.gen_range(1..=3u32) {
            let start = rng.gen_range(0..slots);
            shifts.push(OperatorShift {
                day: 1,
                care_unit: cu,
                operator: OperatorId(op),
                start,
                duration: rng.gen_range(0..=slots - start),
            });
        }
    }
    let items = (0..rng.gen_range(0..=max_items))
        .map(|k| DemandItem {
            patient: PatientId(rng.gen_range(1..=3)),
            service: ServiceId(k as u32 + 1),
            care_unit: *units.choose(&mut rng).unwrap(),
            duration: rng.gen_range(1..=4),
        })
        .collect();
    (DayDemand { day: 1, items }, shifts)
}
