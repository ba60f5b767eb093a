//! File formats and benchmark sweeps for the `ncd-agenda` command.

pub mod format;
pub mod sweep;

pub use format::{FormatError, SolutionFile};
pub use sweep::{run_sweep, write_csv, BenchRow, Method, SweepConfig};
