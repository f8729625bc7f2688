//! Experiment orchestration: configuration, the end-to-end run and reports.

mod config;
mod report;
mod run;

pub use config::{
    Crossing, DesignConfig, DesignFactors, EmbeddingFormat, ExperimentConfig, OutputConfig, PerturbationConfig,
    Preset, ResponseType, Thresholds, TruthConfig, DEFAULT_MASTER_SEED,
};
pub use report::{
    classify, classify_bias, classify_resolution, heatmap_svg, write_report_csv, BiasClass, ReportRow,
    ResolutionClass,
};
pub use run::{
    cue_seed, evaluate_cell, prepare_truth, run, task_seed, ManifestDesign, ManifestTask, RunManifest, RunOptions,
    TaskOutcome, TaskRecord, Truth, MEASURE_COLUMNS,
};
