//! Timed sweeps over generated instances, one CSV row per (instance, method).

use std::io::Write;
use std::time::Duration;

use clap::ValueEnum;
use ncd_agenda::{
    generate_instance, lbbd_solve, monolithic_solve, DriverConfig, GenParams, Instance, ModelError,
    SolveReport, SolveStatus,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mono,
    Lbbd,
}

impl Method {
    pub fn solve(self, instance: &Instance, time_limit: Duration) -> SolveReport {
        match self {
            Self::Mono => monolithic_solve(instance, time_limit),
            Self::Lbbd => lbbd_solve(
                instance,
                &DriverConfig {
                    time_budget: time_limit,
                    ..DriverConfig::default()
                },
            ),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Mono => "mono",
            Self::Lbbd => "lbbd",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub patients: u32,
    pub horizon: u32,
    pub services: usize,
    pub method: Method,
    pub status: SolveStatus,
    pub objective: usize,
    pub ub: usize,
    pub iterations: usize,
    pub cuts: usize,
    pub master_ms: u128,
    pub sp_ms: u128,
    pub total_ms: u128,
}

impl BenchRow {
    pub fn new(
        instance: String,
        patients: u32,
        horizon: u32,
        inst: &Instance,
        method: Method,
        r: &SolveReport,
    ) -> Self {
        Self {
            instance,
            patients,
            horizon,
            services: inst.services_to_schedule(),
            method,
            status: r.status,
            objective: r.objective,
            ub: r.upper_bound,
            iterations: r.iterations.len(),
            cuts: r.cuts.len(),
            master_ms: r.master_time.as_millis(),
            sp_ms: r.sp_time.as_millis(),
            total_ms: r.total_time.as_millis(),
        }
    }

    /// Every column except the three timings.
    pub fn without_timings(&self) -> Self {
        Self {
            master_ms: 0,
            sp_ms: 0,
            total_ms: 0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub patients: Vec<u32>,
    pub horizons: Vec<u32>,
    pub instances_per_cell: u32,
    pub time_limit: Duration,
    pub seed: u64,
    pub jobs: usize,
    pub methods: Vec<Method>,
}

/// Seed of instance `index` in the (`patients`, `horizon`) cell.
pub fn instance_seed(base: u64, patients: u32, horizon: u32, index: u32) -> u64 {
    base ^ (u64::from(patients) << 40) ^ (u64::from(horizon) << 20) ^ u64::from(index)
}

pub fn instance_name(patients: u32, horizon: u32, index: u32) -> String {
    format!("p{patients}-h{horizon}-{index}")
}

pub fn cell_params(base: u64, patients: u32, horizon: u32, index: u32) -> GenParams {
    GenParams::new(patients, horizon, instance_seed(base, patients, horizon, index))
}

/// Runs every (instance, method) pair; rows come back in cell, instance,
/// method order whatever `jobs` is.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<BenchRow>, ModelError> {
    let mut tasks = Vec::new();
    for &p in &config.patients {
        for &h in &config.horizons {
            for i in 0..config.instances_per_cell {
                let inst = generate_instance(&cell_params(config.seed, p, h, i))?;
                for &m in &config.methods {
                    tasks.push((p, h, i, m, inst.clone()));
                }
            }
        }
    }
    let run = |(p, h, i, m, inst): &(u32, u32, u32, Method, Instance)| {
        let report = m.solve(inst, config.time_limit);
        log::info!(
            "{} {m}: {} in {} ms",
            instance_name(*p, *h, *i),
            report.status,
            report.total_time.as_millis()
        );
        BenchRow::new(instance_name(*p, *h, *i), *p, *h, inst, *m, &report)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| ModelError::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(run).collect()))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "instance",
            "patients",
            "horizon",
            "services",
            "method",
            "status",
            "objective",
            "ub",
            "iterations",
            "cuts",
            "master_ms",
            "sp_ms",
            "total_ms",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Optimal counts per method.
pub fn solved_counts(rows: &[BenchRow]) -> (usize, usize) {
    let count = |m| {
        rows.iter()
            .filter(|r| r.method == m && r.status == SolveStatus::Optimal)
            .count()
    };
    (count(Method::Mono), count(Method::Lbbd))
}
