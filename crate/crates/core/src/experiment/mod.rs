//! Config-driven experiments: sweeps, dataset batches and reports.

pub mod config;
pub mod generate;
pub mod output;
pub mod report;
pub mod sweep;

pub use config::{DataSource, ExperimentConfig, Method};
pub use output::{read_results_csv, write_outputs};
pub use sweep::{run_sweep, ResultRow, Status, SummaryRow, SweepOutcome};
