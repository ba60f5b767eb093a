use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ncd_agenda::{generate_instance, verify_solution, GenParams};
use ncd_bench::format::{read_instance, read_solution, write_instance, write_solution};
use ncd_bench::{run_sweep, write_csv, Method, SolutionFile, SweepConfig};

#[derive(Parser)]
#[command(name = "ncd-agenda", version, about = "Outpatient agenda scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Solve an instance and write a solution file.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Run both methods over a grid of generated instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    patients: u32,
    #[arg(long)]
    horizon: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    care_units: u32,
    #[arg(long, default_value_t = 0.1)]
    interdiction_prob: f64,
    #[arg(long, default_value_t = 0.1)]
    necessity_prob: f64,
    #[arg(long, default_value_t = 60)]
    slots_per_day: u32,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Lbbd)]
    method: Method,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    patients: Vec<u32>,
    #[arg(long, value_delimiter = ',', required = true)]
    horizon: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    instances_per_cell: u32,
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solves run at the same time; each solve stays single-threaded.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV destination; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("invalid time limit {s}"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => {
            let params = GenParams {
                care_units: a.care_units,
                interdiction_prob: a.interdiction_prob,
                necessity_prob: a.necessity_prob,
                slots_per_day: a.slots_per_day,
                ..GenParams::new(a.patients, a.horizon, a.seed)
            };
            let inst = generate_instance(&params)?;
            write_instance(&a.out, &inst)?;
            println!(
                "wrote {}: {} occurrences, {} services to schedule",
                a.out.display(),
                inst.occurrences.len(),
                inst.services_to_schedule()
            );
        }
        Command::Solve(a) => {
            let inst = read_instance(&a.instance)?;
            let report = a.method.solve(&inst, seconds(a.time_limit)?);
            write_solution(&a.out, &SolutionFile::from_report(&report))?;
            println!(
                "method={} status={} objective={} ub={} iterations={} cuts={} master_ms={} sp_ms={} total_ms={}",
                a.method,
                report.status,
                report.objective,
                report.upper_bound,
                report.iterations.len(),
                report.cuts.len(),
                report.master_time.as_millis(),
                report.sp_time.as_millis(),
                report.total_time.as_millis()
            );
        }
        Command::Verify { instance, solution } => {
            let inst = read_instance(&instance)?;
            let sol = read_solution(&solution)?.to_solution()?;
            let violations = verify_solution(&inst, &sol)?;
            if violations.is_empty() {
                println!("ok");
                return Ok(ExitCode::SUCCESS);
            }
            for v in &violations {
                println!("{v}");
            }
            eprintln!("{} violation(s)", violations.len());
            return Ok(ExitCode::FAILURE);
        }
        Command::Bench(a) => {
            if a.instances_per_cell == 0 {
                bail!("--instances-per-cell must be positive");
            }
            let config = SweepConfig {
                patients: a.patients,
                horizons: a.horizon,
                instances_per_cell: a.instances_per_cell,
                time_limit: seconds(a.time_limit)?,
                seed: a.seed,
                jobs: a.jobs,
                methods: vec![Method::Mono, Method::Lbbd],
            };
            let rows = run_sweep(&config)?;
            match a.out {
                Some(path) => {
                    let file = std::fs::File::create(&path).with_context(|| path.display().to_string())?;
                    write_csv(&rows, file)?;
                }
                None => write_csv(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
