//! Configuration, presets and file output for domain-wall walk runs.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{parse_config, ConfigError, Overrides, RunConfig};
pub use presets::{preset, FIG2_MASS, PRESET_NAMES};
pub use run::{run, run_preset, RunError, RunSummary};
