//! Seeded random instances and the small worked example.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{
    CareUnitId, Day, Instance, InterdictionRule, NecessityRule, OperatorId, OperatorShift, PacketId,
    PacketOccurrence, PatientId, ServiceDef, ServiceId, Slot,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub patients: u32,
    pub horizon_days: Day,
    pub care_units: u32,
    pub services_per_care_unit: u32,
    /// Daily capacity of a care unit, in slots, inclusive.
    pub capacity_range: (u32, u32),
    pub operators_range: (u32, u32),
    pub duration_range: (u32, u32),
    pub max_services_per_packet: u32,
    /// Care plans per patient; `k` is drawn with weight `1/k`.
    pub cps_range: (u32, u32),
    pub slots_per_day: Slot,
    pub frequencies: Vec<u32>,
    pub interdiction_prob: f64,
    pub necessity_prob: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            patients: 8,
            horizon_days: 7,
            care_units: 5,
            services_per_care_unit: 3,
            capacity_range: (24, 60),
            operators_range: (1, 4),
            duration_range: (6, 15),
            max_services_per_packet: 4,
            cps_range: (1, 4),
            slots_per_day: 60,
            frequencies: vec![7, 14, 30],
            interdiction_prob: 0.1,
            necessity_prob: 0.1,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn new(patients: u32, horizon_days: Day, seed: u64) -> Self {
        Self {
            patients,
            horizon_days,
            seed,
            ..Self::default()
        }
    }

    /// Tiny instances for exhaustive cross-checks: at most three patients
    /// over one week, with few short services.
    pub fn tiny(patients: u32, seed: u64) -> Self {
        Self {
            patients: patients.min(3),
            horizon_days: 7,
            care_units: 2,
            services_per_care_unit: 2,
            capacity_range: (3, 10),
            operators_range: (1, 3),
            duration_range: (1, 4),
            max_services_per_packet: 3,
            cps_range: (1, 2),
            slots_per_day: 12,
            frequencies: vec![7],
            interdiction_prob: 0.2,
            necessity_prob: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let range = |field: &str, (lo, hi): (u32, u32), min: u32| {
            if lo < min || lo > hi {
                Err(ModelError::invalid(
                    field,
                    format!("needs {min} <= low <= high, got ({lo}, {hi})"),
                ))
            } else {
                Ok(())
            }
        };
        if self.horizon_days == 0 {
            return Err(ModelError::invalid("horizon_days", "must be positive"));
        }
        if self.care_units == 0 {
            return Err(ModelError::invalid("care_units", "must be positive"));
        }
        if self.services_per_care_unit == 0 {
            return Err(ModelError::invalid("services_per_care_unit", "must be positive"));
        }
        if self.max_services_per_packet == 0 {
            return Err(ModelError::invalid("max_services_per_packet", "must be positive"));
        }
        range("capacity_range", self.capacity_range, 1)?;
        range("operators_range", self.operators_range, 1)?;
        range("duration_range", self.duration_range, 1)?;
        range("cps_range", self.cps_range, 1)?;
        if self.capacity_range.1 > self.slots_per_day {
            return Err(ModelError::invalid("capacity_range", "exceeds slots_per_day"));
        }
        if self.duration_range.1 > self.slots_per_day {
            return Err(ModelError::invalid("duration_range", "exceeds slots_per_day"));
        }
        if self.frequencies.is_empty() || self.frequencies.contains(&0) {
            return Err(ModelError::invalid(
                "frequencies",
                "must be a non-empty list of positive periods",
            ));
        }
        for (field, p) in [
            ("interdiction_prob", self.interdiction_prob),
            ("necessity_prob", self.necessity_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::invalid(field, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Number of care plans for one patient, drawn with weight `1/k` over
/// `cps_range`.
pub fn care_plan_count_distribution(
    params: &GenParams,
) -> Result<(Vec<u32>, WeightedIndex<f64>), ModelError> {
    let (lo, hi) = params.cps_range;
    let counts: Vec<u32> = (lo..=hi).collect();
    let weights = counts.iter().map(|&k| 1.0 / f64::from(k));
    let dist = WeightedIndex::new(weights).map_err(|e| ModelError::invalid("cps_range", e.to_string()))?;
    Ok((counts, dist))
}

pub fn generate_instance(params: &GenParams) -> Result<Instance, ModelError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let horizon = params.horizon_days;

    let care_units: Vec<CareUnitId> = (1..=params.care_units).map(CareUnitId).collect();
    let mut services = Vec::new();
    for &cu in &care_units {
        for _ in 0..params.services_per_care_unit {
            services.push(ServiceDef {
                id: ServiceId(services.len() as u32 + 1),
                care_unit: cu,
                duration: rng.gen_range(params.duration_range.0..=params.duration_range.1),
            });
        }
    }

    // one weekly pattern of (start, duration) per care unit and weekday
    let mut week: Vec<Vec<Vec<(Slot, Slot)>>> = Vec::with_capacity(7);
    for _ in 0..7 {
        let mut per_unit = Vec::with_capacity(care_units.len());
        for _ in &care_units {
            let capacity = rng.gen_range(params.capacity_range.0..=params.capacity_range.1);
            let k = rng
                .gen_range(params.operators_range.0..=params.operators_range.1)
                .min(capacity);
            let mut cuts: Vec<u32> = index::sample(&mut rng, capacity as usize - 1, k as usize - 1)
                .into_iter()
                .map(|c| c as u32 + 1)
                .collect();
            cuts.sort_unstable();
            cuts.push(capacity);
            let mut prev = 0;
            let mut ops = Vec::with_capacity(cuts.len());
            for c in cuts {
                let len = c - prev;
                prev = c;
                let start = rng.gen_range(0..=params.slots_per_day - len);
                ops.push((start, len));
            }
            per_unit.push(ops);
        }
        week.push(per_unit);
    }
    let mut shifts = Vec::new();
    for day in 1..=horizon {
        for (u, ops) in week[(day as usize - 1) % 7].iter().enumerate() {
            for (j, &(start, duration)) in ops.iter().enumerate() {
                shifts.push(OperatorShift {
                    day,
                    care_unit: care_units[u],
                    operator: OperatorId(j as u32 + 1),
                    start,
                    duration,
                });
            }
        }
    }

    let (counts, cp_dist) = care_plan_count_distribution(params)?;
    let per_packet = (params.max_services_per_packet as usize).min(services.len());
    let mut occurrences = Vec::new();
    // (patient, services, frequency) of every packet
    let mut packets: Vec<(PatientId, BTreeSet<ServiceId>, u32)> = Vec::new();
    for p in 1..=params.patients {
        let patient = PatientId(p);
        let n_cps = counts[cp_dist.sample(&mut rng)];
        for _ in 0..n_cps {
            let packet = PacketId(packets.len() as u32 + 1);
            let freq = *params.frequencies.choose(&mut rng).expect("validated non-empty");
            let tolerance = (freq - 1) / 2;
            let n = rng.gen_range(1..=per_packet);
            let chosen: BTreeSet<ServiceId> = index::sample(&mut rng, services.len(), n)
                .into_iter()
                .map(|i| services[i].id)
                .collect();
            let phase = rng.gen_range(1..=freq.min(horizon));
            let mut ideal = phase;
            let mut occurrence = 0;
            while ideal <= horizon {
                occurrences.push(PacketOccurrence {
                    patient,
                    packet,
                    occurrence,
                    ideal_date: ideal,
                    tolerance,
                    services: chosen.iter().copied().collect(),
                });
                occurrence += 1;
                ideal += freq;
            }
            packets.push((patient, chosen, freq));
        }
    }

    let mut together: BTreeSet<(ServiceId, ServiceId)> = BTreeSet::new();
    let mut min_freq: BTreeMap<ServiceId, u32> = BTreeMap::new();
    for (_, set, freq) in &packets {
        for &a in set {
            for &b in set {
                together.insert((a, b));
            }
            let f = min_freq.entry(a).or_insert(*freq);
            *f = (*f).min(*freq);
        }
    }
    let mut decided: BTreeSet<(ServiceId, ServiceId)> = BTreeSet::new();
    let mut interdictions = Vec::new();
    let mut necessities = Vec::new();
    // packets of one patient are contiguous
    for own in packets.chunk_by(|x, y| x.0 == y.0) {
        for (i, (_, sa, _)) in own.iter().enumerate() {
            for (j, (_, sb, _)) in own.iter().enumerate() {
                if i == j {
                    continue;
                }
                for &a in sa {
                    for &b in sb {
                        if a == b || together.contains(&(a, b)) || !decided.insert((a, b)) {
                            continue;
                        }
                        if rng.gen_bool(params.interdiction_prob) {
                            interdictions.push(InterdictionRule {
                                trigger: a,
                                blocked: b,
                                n_days: rng.gen_range(1..=3),
                            });
                        } else if rng.gen_bool(params.necessity_prob) {
                            let d_min = rng.gen_range(0..=2);
                            necessities.push(NecessityRule {
                                trigger: a,
                                required: b,
                                d_min,
                                d_max: (min_freq[&b] - 1).max(d_min + 1),
                            });
                        }
                    }
                }
            }
        }
    }

    let instance = Instance {
        horizon_days: horizon,
        slots_per_day: params.slots_per_day,
        services,
        care_units,
        shifts,
        occurrences,
        interdictions,
        necessities,
    };
    instance.validate()?;
    Ok(instance)
}

/// Two patients sharing a red service over three days. Day 1 has enough red
/// time in total but not in one piece, day 2 only has one-slot operators,
/// and day 3 fits one red delivery: the optimum puts the first patient on
/// day 3 and the second on day 1.
pub fn figure1_instance() -> Instance {
    let (red, blue) = (CareUnitId(1), CareUnitId(2));
    let shift = |day, care_unit, operator, start, duration| OperatorShift {
        day,
        care_unit,
        operator: OperatorId(operator),
        start,
        duration,
    };
    Instance {
        horizon_days: 3,
        slots_per_day: 10,
        services: vec![
            ServiceDef {
                id: ServiceId(1),
                care_unit: red,
                duration: 2,
            },
            ServiceDef {
                id: ServiceId(2),
                care_unit: blue,
                duration: 1,
            },
        ],
        care_units: vec![red, blue],
        shifts: vec![
            shift(1, red, 1, 0, 3),
            shift(1, red, 2, 3, 1),
            shift(2, red, 1, 0, 1),
            shift(2, red, 2, 4, 1),
            shift(2, red, 3, 8, 1),
            shift(3, red, 1, 0, 2),
            shift(1, blue, 1, 0, 10),
            shift(2, blue, 1, 0, 10),
            shift(3, blue, 1, 2, 8),
        ],
        occurrences: vec![
            PacketOccurrence {
                patient: PatientId(1),
                packet: PacketId(1),
                occurrence: 0,
                ideal_date: 1,
                tolerance: 2,
                services: vec![ServiceId(1), ServiceId(2)],
            },
            PacketOccurrence {
                patient: PatientId(2),
                packet: PacketId(2),
                occurrence: 0,
                ideal_date: 1,
                tolerance: 1,
                services: vec![ServiceId(1)],
            },
        ],
        interdictions: Vec::new(),
        necessities: Vec::new(),
    }
}
