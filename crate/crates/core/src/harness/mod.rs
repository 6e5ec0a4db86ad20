//! Experiment configuration, Monte-Carlo sweep driver, CSV emission and
//! text/chart reporting.

mod config;
mod csv;
mod report;
mod sweep;

pub use config::{ExperimentConfig, Pipeline, WorkloadSpec};
pub use csv::{csv_bytes, emit_csv, parse_csv, ResultTable, CSV_FLOAT_DIGITS};
pub use report::{chart_metrics, summarize, swept_axes, write_charts};
pub use sweep::{run_simulate_trace, run_sweep, ResultRow, SweepPoint};
