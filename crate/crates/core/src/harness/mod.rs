//! Experiment harness: configurations, figure presets, block runs and CSV output.

mod config;
mod presets;
mod run;
mod table;

pub use config::{parse_kv, Angle, ExperimentConfig, InputSpec, Scenario};
pub use presets::{find_preset, Preset, PRESETS};
pub use run::{run_scenario, run_scenario_full, Diagnostics, RunOutput, Streams};
pub use table::{emit_csv, quantize, ResultTable};
