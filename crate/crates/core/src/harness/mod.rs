//! Experiment orchestration: TOML configs, repeated runs, the four-arm
//! ablation, and CSV output.

mod config;
mod csv_out;
mod experiment;

pub use config::{EncoderConfig, ExperimentConfig, StyleSource, StyleSpec};
pub use csv_out::{
    summary_csv, summary_header, table_csv, trajectory_csv, trajectory_header, write_text,
    RepeatSummary,
};
pub use experiment::{
    run_ablation_suite, run_experiment, AblationReport, Arm, ArmResult, ExperimentSummary,
};
