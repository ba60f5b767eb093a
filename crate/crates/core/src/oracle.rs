//! Exhaustive reference solvers for tiny instances. They share nothing with
//! the production search beyond the rule checker and are meant for testing.

use std::collections::HashMap;

use crate::error::ModelError;
use crate::model::{Day, DayAssignment, Instance, OperatorShift};
use crate::subproblem::DayDemand;
use crate::verify::check_assignment;

/// Largest number of day assignments [`brute_force_optimum`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Optimal number of scheduled occurrences, by enumerating every day
/// assignment and every agenda.
pub fn brute_force_optimum(instance: &Instance) -> Result<usize, ModelError> {
    let keys: Vec<_> = instance.occurrences.iter().map(|o| o.key()).collect();
    let values = instance.horizon_days as u64 + 1;
    let total = u32::try_from(keys.len())
        .ok()
        .and_then(|k| values.checked_pow(k))
        .filter(|&t| t <= BRUTE_FORCE_LIMIT)
        .ok_or_else(|| ModelError::Input(format!("{} occurrences is too many to enumerate", keys.len())))?;

    let shifts: Vec<Vec<OperatorShift>> = (0..=instance.horizon_days)
        .map(|d| instance.shifts_on(d))
        .collect();
    let mut memo: HashMap<(Day, Vec<(u32, u32)>), bool> = HashMap::new();
    let mut best = 0;
    let mut digits = vec![0u32; keys.len()];
    for _ in 0..total {
        let scheduled = digits.iter().filter(|&&d| d > 0).count();
        if scheduled > best {
            let a: DayAssignment = keys
                .iter()
                .zip(&digits)
                .map(|(k, &d)| (*k, (d > 0).then_some(d)))
                .collect();
            if check_assignment(instance, &a)?.is_empty() {
                let mut ok = true;
                for day in a.days_used() {
                    let demand = DayDemand::from_assignment(instance, &a, day)?;
                    let sig = demand.items.iter().map(|i| (i.patient.0, i.service.0)).collect();
                    let feasible = *memo
                        .entry((day, sig))
                        .or_insert_with(|| agenda_exists_exhaustive(&demand, &shifts[day as usize]));
                    if !feasible {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    best = scheduled;
                }
            }
        }
        for d in digits.iter_mut() {
            *d += 1;
            if u64::from(*d) < values {
                break;
            }
            *d = 0;
        }
    }
    Ok(best)
}

/// Tries every operator and every start for every item.
pub fn agenda_exists_exhaustive(demand: &DayDemand, shifts: &[OperatorShift]) -> bool {
    let mut items = demand.items.clone();
    items.sort_by_key(|i| (i.patient, i.service));
    items.dedup_by_key(|i| (i.patient, i.service));
    let mut placed: Vec<(usize, usize, u32, u32)> = Vec::new();
    place(&items, 0, shifts, &mut placed)
}

fn place(
    items: &[crate::subproblem::DemandItem],
    i: usize,
    shifts: &[OperatorShift],
    placed: &mut Vec<(usize, usize, u32, u32)>,
) -> bool {
    let Some(item) = items.get(i) else {
        return true;
    };
    for (si, sh) in shifts.iter().enumerate() {
        if sh.care_unit != item.care_unit || sh.duration < item.duration {
            continue;
        }
        for start in sh.start..=sh.end() - item.duration {
            let end = start + item.duration;
            let clash = placed.iter().any(|&(pi, psi, ps, pe)| {
                let overlap = start < pe && ps < end;
                let same_operator =
                    shifts[psi].care_unit == sh.care_unit && shifts[psi].operator == sh.operator;
                overlap && (items[pi].patient == item.patient || same_operator)
            });
            if clash {
                continue;
            }
            placed.push((i, si, start, end));
            if place(items, i + 1, shifts, placed) {
                return true;
            }
            placed.pop();
        }
    }
    false
}
