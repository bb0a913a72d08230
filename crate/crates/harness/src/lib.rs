//! Monte Carlo experiment harness: configuration, sweeps, paired summaries,
//! CSV output, instance snapshots and invariant suites.

pub mod config;
pub mod output;
pub mod snapshot;
pub mod summary;
pub mod sweep;
pub mod validate;

pub use config::{ExperimentConfig, Overrides};
pub use sweep::{run_sweep, Plan, ResultRecord, SweepKind};
