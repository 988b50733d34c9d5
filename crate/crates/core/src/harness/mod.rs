//! Experiment configuration, orchestration and report output.

mod config;
mod output;
mod run;

pub use config::{
    default_reference_exponent, max_dimension, parse_config, serialize_config, ExperimentConfig,
    DEFAULT_MAX_N, MAX_N_ENV,
};
pub use output::{
    write_delta_csv, write_disk_csv, write_report_files, write_scaling_csv, REPORT_FILES,
};
pub use run::{
    disk_row, replicate_pair, replicate_stream, run_experiment, run_experiment_with_workers,
    ConsistencySummary, ConstantCaseRow, DiskRow, RunReport, StageTiming,
};
