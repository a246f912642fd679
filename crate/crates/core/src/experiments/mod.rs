//! End-to-end studies: configuration, the density cache, runs and reports.

mod cache;
mod config;
mod report;
mod run;

pub use cache::{parse_cache, CacheRecords, FileCache};
pub use config::{parse_config, spencer_preset, ExperimentConfig, Grid, Mode, OutputFormat, DEFAULT_COST_LIMIT};
pub use report::{Meta, Report, Row, CSV_HEADER};
pub use run::{estimate_cost, run_experiment, run_experiment_with_cache};
