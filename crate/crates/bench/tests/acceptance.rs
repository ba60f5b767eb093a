//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ncd_agenda::oracle::brute_force_optimum;
use ncd_agenda::*;
use ncd_bench::format::solution_to_string;
use ncd_bench::sweep::solved_counts;
use ncd_bench::{run_sweep, write_csv, BenchRow, Method, SolutionFile, SweepConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SMALL_INSTANCES: u64 = 50;
const SMALL_BUDGET: Duration = Duration::from_secs(60);
const SWEEP_LIMIT: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Solves of one small instance, kept for the later criteria.
struct SmallRun {
    inst: Instance,
    lbbd: SolveReport,
    mono: SolveReport,
}

fn small_instance(seed: u64) -> Instance {
    generate_instance(&GenParams::tiny(1 + (seed % 3) as u32, seed)).expect("tiny params are valid")
}

fn solve_small() -> Vec<SmallRun> {
    (0..SMALL_INSTANCES)
        .map(|seed| {
            let inst = small_instance(seed);
            let lbbd = lbbd_solve(
                &inst,
                &DriverConfig {
                    time_budget: SMALL_BUDGET,
                    ..DriverConfig::default()
                },
            );
            let mono = monolithic_solve(&inst, SMALL_BUDGET);
            SmallRun { inst, lbbd, mono }
        })
        .collect()
}

fn oracle_equivalence(runs: &[SmallRun]) -> Outcome {
    let mut failures = Vec::new();
    let mut total_occurrences = 0;
    for (seed, r) in runs.iter().enumerate() {
        let inst = &r.inst;
        total_occurrences += inst.occurrences.len();
        assert!(inst.care_units.len() <= 2 && inst.horizon_days <= 7 && inst.slots_per_day <= 12);
        let best = match brute_force_optimum(inst) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let statuses = (r.lbbd.status, r.mono.status);
        if statuses != (SolveStatus::Optimal, SolveStatus::Optimal) {
            failures.push(format!("seed {seed}: statuses {statuses:?}"));
        }
        if r.lbbd.objective != best || r.mono.objective != best {
            failures.push(format!(
                "seed {seed}: lbbd {} mono {} brute {best}",
                r.lbbd.objective, r.mono.objective
            ));
        }
        for (name, rep) in [("lbbd", &r.lbbd), ("mono", &r.mono)] {
            let v = verify_solution(inst, &rep.solution).expect("solution keys match");
            if !v.is_empty() {
                failures.push(format!("seed {seed}: {name} has {} violations", v.len()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} instances, {} occurrences; {}",
            runs.len(),
            total_occurrences,
            if failures.is_empty() {
                "lbbd = mono = brute force, zero violations".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

fn cut_validity(runs: &[SmallRun]) -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        for rec in &r.lbbd.iterations {
            for gid in &rec.new_cuts {
                let cut = r.lbbd.cuts.iter().find(|c| c.gid == *gid).expect("recorded cut");
                checked += 1;
                if !cut_blocks(cut, &rec.assignment) {
                    failures.push(format!("seed {seed} gid {gid}: does not block its master"));
                }
                let only: DayAssignment = cut.group.iter().map(|k| (*k, Some(cut.day))).collect();
                let demand = DayDemand::from_assignment(&r.inst, &only, cut.day).expect("valid group");
                if sp_solve(&demand, &r.inst.shifts_on(cut.day)).is_feasible() {
                    failures.push(format!("seed {seed} gid {gid}: group is feasible"));
                }
            }
        }
        if r.lbbd.cuts.len() != r.lbbd.iterations.iter().map(|i| i.new_cuts.len()).sum::<usize>() {
            failures.push(format!("seed {seed}: cut pool and iteration records disagree"));
        }
    }
    outcome(
        failures.is_empty() && checked > 0,
        format!(
            "{checked} cuts checked; {} exceptions {}",
            failures.len(),
            failures.join("; ")
        ),
    )
}

fn trace_ok(r: &SolveReport) -> Result<(), String> {
    let ub = r.upper_bound_trace();
    let lb = r.lower_bound_trace();
    if ub.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("upper bounds increase: {ub:?}"));
    }
    if lb.iter().zip(&ub).any(|(l, u)| l > u) {
        return Err(format!("lower above upper: {lb:?} vs {ub:?}"));
    }
    if r.objective > r.upper_bound {
        return Err(format!("objective {} above bound {}", r.objective, r.upper_bound));
    }
    if r.status == SolveStatus::Optimal {
        let (Some(&l), Some(&u)) = (lb.last(), ub.last()) else {
            return Err("optimal run without iterations".into());
        };
        if l != u || r.objective != u || r.upper_bound != u {
            return Err(format!("optimal but lb {l} ub {u} objective {}", r.objective));
        }
    }
    Ok(())
}

fn bound_discipline(runs: &[SmallRun]) -> Outcome {
    let mut reports: Vec<(String, SolveReport)> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("small {i}"), r.lbbd.clone()))
        .collect();
    for seed in 0..60u64 {
        let patients = [4, 6, 8][seed as usize % 3];
        let inst = generate_instance(&GenParams::new(patients, 7, 1000 + seed)).expect("valid params");
        let r = lbbd_solve(
            &inst,
            &DriverConfig {
                time_budget: Duration::from_secs(10),
                ..DriverConfig::default()
            },
        );
        reports.push((format!("p{patients} seed {}", 1000 + seed), r));
    }
    let optimal = reports
        .iter()
        .filter(|(_, r)| r.status == SolveStatus::Optimal)
        .count();
    let iterations: usize = reports.iter().map(|(_, r)| r.iterations.len()).sum();
    let failures: Vec<String> = reports
        .iter()
        .filter_map(|(name, r)| trace_ok(r).err().map(|e| format!("{name}: {e}")))
        .collect();
    outcome(
        failures.is_empty() && reports.len() >= 100,
        format!(
            "{} runs ({optimal} optimal, {iterations} iterations); {}",
            reports.len(),
            if failures.is_empty() {
                "all traces monotone and closed".to_string()
            } else {
                failures.join("; ")
            }
        ),
    )
}

/// A random single-day agenda built to be feasible, with its instance.
fn random_feasible_day(rng: &mut ChaCha8Rng) -> (Instance, FullSolution) {
    let slots = 20;
    let units: Vec<CareUnitId> = (1..=rng.gen_range(1..=3)).map(CareUnitId).collect();
    let mut shifts = Vec::new();
    for &cu in &units {
        for op in 1..=rng.gen_range(1..=3) {
            let start = rng.gen_range(0..slots - 1);
            shifts.push(OperatorShift {
                day: 1,
                care_unit: cu,
                operator: OperatorId(op),
                start,
                duration: rng.gen_range(1..=slots - start),
            });
        }
    }
    let services: Vec<ServiceDef> = (1..=rng.gen_range(1..=6))
        .map(|id| ServiceDef {
            id: ServiceId(id),
            care_unit: *units.choose(rng).unwrap(),
            duration: rng.gen_range(1..=5),
        })
        .collect();
    let patients: Vec<PatientId> = (1..=rng.gen_range(1..=4)).map(PatientId).collect();

    // (patient, service) -> (care unit, operator, start, end)
    let mut placed: BTreeMap<(PatientId, ServiceId), (CareUnitId, OperatorId, u32, u32)> = BTreeMap::new();
    for _ in 0..15 {
        let p = *patients.choose(rng).unwrap();
        let s = services.choose(rng).unwrap();
        if placed.contains_key(&(p, s.id)) {
            continue;
        }
        let own: Vec<&OperatorShift> = shifts.iter().filter(|sh| sh.care_unit == s.care_unit).collect();
        let sh = own.choose(rng).unwrap();
        if sh.duration < s.duration {
            continue;
        }
        let start = rng.gen_range(sh.start..=sh.end() - s.duration);
        let end = start + s.duration;
        let clash = placed.iter().any(|(&(q, _), &(cu, op, a, b))| {
            start < b && a < end && (q == p || (cu, op) == (sh.care_unit, sh.operator))
        });
        if !clash {
            placed.insert((p, s.id), (sh.care_unit, sh.operator, start, end));
        }
    }

    let mut occurrences = Vec::new();
    for &p in &patients {
        let mine: Vec<ServiceId> = placed.keys().filter(|k| k.0 == p).map(|k| k.1).collect();
        if mine.is_empty() {
            continue;
        }
        let split = rng.gen_range(1..=mine.len());
        for part in [&mine[..split], &mine[split..]] {
            if part.is_empty() {
                continue;
            }
            occurrences.push(PacketOccurrence {
                patient: p,
                packet: PacketId(occurrences.len() as u32 + 1),
                occurrence: 0,
                ideal_date: 1,
                tolerance: 0,
                services: part.to_vec(),
            });
        }
    }
    let inst = Instance {
        horizon_days: 1,
        slots_per_day: slots,
        services,
        care_units: units,
        shifts,
        occurrences,
        interdictions: Vec::new(),
        necessities: Vec::new(),
    };
    let assignment: DayAssignment = inst.occurrences.iter().map(|o| (o.key(), Some(1))).collect();
    let mut agenda = DailySchedule::empty(1);
    for (&(p, s), &(_, op, start, _)) in &placed {
        agenda.entries.insert((p, s), AgendaEntry { operator: op, start });
    }
    let agendas = if placed.is_empty() {
        Vec::new()
    } else {
        vec![agenda]
    };
    (inst, FullSolution { assignment, agendas })
}

fn relaxation_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut schedules = 0;
    let mut entries = 0;
    let mut rejected = 0;
    let mut infeasible_construction = 0;
    while schedules < 1000 {
        let (inst, sol) = random_feasible_day(&mut rng);
        if sol.agendas.is_empty() {
            continue;
        }
        schedules += 1;
        entries += sol.agendas[0].entries.len();
        if !verify_solution(&inst, &sol).expect("keys match").is_empty() {
            infeasible_construction += 1;
        }
        if !capacity_ok(&inst, &sol.assignment) {
            rejected += 1;
        }
    }
    outcome(
        rejected == 0 && infeasible_construction == 0,
        format!(
            "{schedules} feasible agendas ({entries} services); capacity_ok rejected {rejected}, \
             constructions failing verification {infeasible_construction}"
        ),
    )
}

fn figure1() -> Outcome {
    let inst = figure1_instance();
    let p1 = OccurrenceKey::new(1, 1, 0);
    let p2 = OccurrenceKey::new(2, 2, 0);
    let both = |day| -> DayAssignment { [(p1, Some(day)), (p2, Some(day))].into_iter().collect() };
    let mut checks = Vec::new();

    let day1 = DayDemand::from_assignment(&inst, &both(1), 1).unwrap();
    checks.push((
        "sp(day 1, both) infeasible",
        !sp_solve(&day1, &inst.shifts_on(1)).is_feasible(),
    ));
    checks.push(("capacity_ok rejects both on day 3", !capacity_ok(&inst, &both(3))));
    checks.push(("capacity_ok accepts both on day 1", capacity_ok(&inst, &both(1))));

    let r = lbbd_solve(&inst, &DriverConfig::default());
    let first = r.cuts.first();
    checks.push((
        "first no-good is {p1/pck1, p2/pck2} on day 1 with gid 1",
        first.is_some_and(|c| c.day == 1 && c.gid == 1 && c.group == BTreeSet::from([p1, p2])),
    ));
    checks.push(("converges optimal", r.status == SolveStatus::Optimal));
    checks.push(("objective 2", r.objective == 2));
    checks.push(("p1 on day 3", r.solution.assignment.get(&p1) == Some(3)));
    checks.push((
        "p2 on another day",
        r.solution.assignment.get(&p2).is_some_and(|d| d != 3),
    ));
    checks.push((
        "solution verifies",
        verify_solution(&inst, &r.solution).unwrap().is_empty(),
    ));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let trail: Vec<String> = r
        .iterations
        .iter()
        .map(|it| {
            let days: Vec<String> = [p1, p2]
                .iter()
                .map(|k| it.assignment.get(k).map_or("-".into(), |d| d.to_string()))
                .collect();
            format!("({})", days.join(","))
        })
        .collect();
    outcome(
        failed.is_empty(),
        format!(
            "{} checks; master trail p1,p2 = {}; {}",
            checks.len(),
            trail.join(" -> "),
            if failed.is_empty() {
                "all exact".to_string()
            } else {
                format!("failed: {}", failed.join(", "))
            }
        ),
    )
}

fn sweep() -> Outcome {
    let config = SweepConfig {
        patients: vec![4, 8, 12],
        horizons: vec![7, 14],
        instances_per_cell: 10,
        time_limit: SWEEP_LIMIT,
        seed: 0,
        jobs: 1,
        methods: vec![Method::Mono, Method::Lbbd],
    };
    let started = Instant::now();
    let rows = run_sweep(&config).expect("sweep parameters are valid");
    let csv_path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_sweep.csv");
    if let Ok(f) = std::fs::File::create(&csv_path) {
        let _ = write_csv(&rows, f);
    }
    let mut cells = Vec::new();
    let mut strictly_better = false;
    for &p in &config.patients {
        for &h in &config.horizons {
            let cell: Vec<BenchRow> = rows
                .iter()
                .filter(|r| r.patients == p && r.horizon == h)
                .cloned()
                .collect();
            let (mono, lbbd) = solved_counts(&cell);
            strictly_better |= lbbd > mono;
            cells.push(format!("p{p}/h{h} mono {mono} lbbd {lbbd}"));
        }
    }
    let (mono, lbbd) = solved_counts(&rows);
    outcome(
        lbbd >= mono && strictly_better,
        format!(
            "optimal: mono {mono}/60, lbbd {lbbd}/60 [{}]; {:.0} s; rows in {}",
            cells.join(", "),
            started.elapsed().as_secs_f64(),
            csv_path.display()
        ),
    )
}

fn non_timing_rows(runs: &[SmallRun]) -> Vec<BenchRow> {
    runs.iter()
        .enumerate()
        .flat_map(|(i, r)| {
            let name = format!("small-{i}");
            let p = r
                .inst
                .occurrences
                .iter()
                .map(|o| o.patient)
                .collect::<BTreeSet<_>>()
                .len() as u32;
            let h = r.inst.horizon_days;
            [
                BenchRow::new(name.clone(), p, h, &r.inst, Method::Mono, &r.mono).without_timings(),
                BenchRow::new(name, p, h, &r.inst, Method::Lbbd, &r.lbbd).without_timings(),
            ]
        })
        .collect()
}

fn files(runs: &[SmallRun]) -> Vec<String> {
    runs.iter()
        .flat_map(|r| {
            [
                solution_to_string(&SolutionFile::from_report(&r.lbbd)),
                solution_to_string(&SolutionFile::from_report(&r.mono)),
            ]
        })
        .collect()
}

fn determinism(first: &[SmallRun]) -> Outcome {
    let second = solve_small();
    let same_files = files(first) == files(&second);
    let same_rows = non_timing_rows(first) == non_timing_rows(&second);
    let fig = || {
        let inst = figure1_instance();
        solution_to_string(&SolutionFile::from_report(&lbbd_solve(
            &inst,
            &DriverConfig::default(),
        )))
    };
    let same_fig = fig() == fig();
    let small_sweep = || {
        run_sweep(&SweepConfig {
            patients: vec![4],
            horizons: vec![7],
            instances_per_cell: 3,
            time_limit: Duration::from_secs(10),
            seed: 7,
            jobs: 1,
            methods: vec![Method::Mono, Method::Lbbd],
        })
        .unwrap()
        .iter()
        .map(BenchRow::without_timings)
        .collect::<Vec<_>>()
    };
    let same_sweep = small_sweep() == small_sweep();
    outcome(
        same_files && same_rows && same_fig && same_sweep,
        format!(
            "solution files identical: {same_files}; bench rows identical: {same_rows}; \
             example file identical: {same_fig}; repeated sweep identical: {same_sweep}"
        ),
    )
}

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut report = |n: u32, name: &str, started: Instant, o: Outcome| {
        all_pass &= o.pass;
        println!(
            "criterion {n} ({name}): {} [{:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            o.detail
        );
    };

    let t = Instant::now();
    let runs = solve_small();
    report(1, "oracle equivalence", t, oracle_equivalence(&runs));
    let t = Instant::now();
    report(2, "cut validity", t, cut_validity(&runs));
    let t = Instant::now();
    report(3, "bound discipline", t, bound_discipline(&runs));
    let t = Instant::now();
    report(4, "relaxation soundness", t, relaxation_soundness());
    let t = Instant::now();
    report(5, "two-patient example", t, figure1());
    let t = Instant::now();
    report(7, "determinism", t, determinism(&runs));
    let t = Instant::now();
    report(6, "decomposition benefit", t, sweep());

    if all_pass {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
