//! Declarative uncertainty studies: a JSON study file names the model, the input
//! distribution and a list of steps; running it writes `report.json` and per-step CSV
//! files.

pub mod config;
pub mod study;

pub use config::{parse, Diagnostic, StudyConfig, FLOOD_STUDY};
pub use study::{run_config, run_file, validate_file, Outcome, Report, EXIT_FAILED, EXIT_INVALID, EXIT_OK};
