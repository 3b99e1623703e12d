//! Configuration, diagnostics, file formats and the run driver.

pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod output;

pub use config::{load_config, parse_config, OutputConfig, RunConfig};
pub use diagnostics::{compute_diagnostics, hole_probe, DiagnosticsRecord, HoleProbe};
pub use driver::{execute, Overrides, RunSummary};
