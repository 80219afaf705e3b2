//! Game loop, experiment configuration and persistence, and scaling fits.

mod config;
mod experiment;
mod fit;
mod game;

pub use config::{ClassSpec, ExperimentConfig, SweepGrid, SCHEMA_VERSION};
pub use experiment::{
    output_paths, read_csv, rows_to_csv, run_experiment, run_sweep, write_outputs, CsvRow,
    ExperimentOutput, RunOptions, AGGREGATE_TAG, CSV_COLUMNS,
};
pub use fit::{fit_points, fit_scaling, fit_series, ScalingFit, SeriesKey};
pub use game::{run_game, RoundRecord, Transcript};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "SMOOTHLAB_OUT_DIR";
