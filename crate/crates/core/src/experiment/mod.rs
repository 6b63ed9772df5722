//! Reproducible batch runs: configuration, artifact output and the full
//! ingest → train → evaluate → predict → simulate chain.

mod artifacts;
mod config;
mod run;

pub use artifacts::{hash_parts, ArtifactEntry, ArtifactWriter, OutputLock, RunManifest, LOCK_FILE, PARTIAL_SUFFIX};
pub use config::{DataConfig, RunConfig, SplitConfig, SystemRef};
pub use run::{
    evaluate_season, importance_rows, join_weather, model_file_name, model_inputs, observed_irradiance, prepare,
    prepare_series, read_predictions_csv, regenerate_report, run_full_experiment, write_importances, write_json,
    ImportanceRow, Prepared, RunOutcome, SeasonResult,
};
