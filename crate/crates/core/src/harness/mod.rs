//! Experiment orchestration behind the command-line tool.

mod commands;
mod config;
mod reproduce;

pub use commands::{
    cmd_eval, cmd_preprocess, cmd_stats, cmd_train_eval, predictions_tsv, train_and_evaluate, ClassicalArtifact,
    EvalOutcome, RunReport, SplitStats, StatsReport, TrainedModel, CLASSICAL_ARTIFACT, ENCODER_ARTIFACT,
    PREDICTIONS_FILE, REPORT_FILE,
};
pub use config::{
    load_data, DataConfig, DataOrigin, ExperimentConfig, FeatureKind, LoadedData, ModelKind, DATA_DIR_ENV,
    SYNTHETIC_DATA_SEED,
};
pub use reproduce::{
    cmd_reproduce, tolerance, CellResult, CellStatus, OrderingCheck, ReproduceReport, ENCODER_ROW_LABEL,
    REFERENCE_F1, REPRODUCE_JSON, REPRODUCE_TABLE,
};
