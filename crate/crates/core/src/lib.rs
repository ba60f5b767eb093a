//! Outpatient agenda scheduling for chronic-care packets.
//!
//! A day-level master problem picks a day for every packet occurrence; a
//! per-day subproblem assigns operators and start times. [`lbbd_solve`]
//! alternates the two and [`monolithic_solve`] searches both at once.

pub mod error;
pub mod generator;
pub mod lbbd;
pub mod master;
pub mod model;
pub mod monolithic;
pub mod oracle;
mod report;
mod search;
pub mod subproblem;
pub mod verify;

pub use error::ModelError;
pub use generator::{figure1_instance, generate_instance, GenParams};
pub use lbbd::{compute_nogood, lbbd_solve, DriverConfig};
pub use master::{capacity_ok, cut_blocks, master_solve, CutPool, MasterOutcome, NoGoodCut};
pub use model::*;
pub use monolithic::monolithic_solve;
pub use report::{IterationRecord, SolveReport, SolveStatus};
pub use subproblem::{sp_solve, sp_solve_until, DayDemand, DemandItem, SpOutcome};
pub use verify::{check_assignment, verify_solution, Violation, ViolationKind};
