//! Per-epoch traces, their statistics, and the CSV report suite.

mod emit;
mod stats;
mod trace;

pub use emit::{
    breakdown_csv, breakdown_file_name, emit_reports, EpochReport, FloorplanRow, LayerActivity,
    EPOCH_DIR, SUMMARY_FILES,
};
pub use stats::{distribution_summary, input_activity, DistributionSummary, LayerDistribution};
pub use trace::{EpochTrace, LayerTrace};
