//! Scenario definitions, boundary-condition controllers and the config
//! file format.

pub mod config;
pub mod control;
pub mod units;

pub use config::{CellField, Document, GridSpec, InitialFields, ScenarioConfig};
pub use control::{ControlOutputs, Controls, FlowControl, PressureSchedule, StressControl};

use std::path::Path;

use crate::error::Result;

/// Read, parse and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path)
}
