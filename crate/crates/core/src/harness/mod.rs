//! Configuration, built-in presets, seeded replications and result files.

mod config;
mod output;
mod presets;
mod run;

pub use config::{
    DatasetEnvConfig, EnvironmentConfig, ExperimentConfig, PolicyEntry, SyntheticEnvConfig,
};
pub use output::{
    curves_file, emit_outputs, render_curves, render_selection, selection_file, CURVES_HEADER,
    MANIFEST_FILE, SELECTION_HEADER,
};
pub use presets::{preset, PRESET_NAMES};
pub use run::{run_experiment, Experiment, Manifest, PolicyResult, ResultBundle};
