//! Configuration, presets and scenario execution for the `bohm-rotor` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod presets;
pub mod run;

pub use config::{config_with_preset, parse_config, ScenarioConfig};
pub use error::CliError;
pub use presets::{list_presets, PresetInfo};
pub use run::{execute, run_scenario, RunArtifacts, RunSummary, ScenarioOutput};
