//! Scenario runner behind the `qmeas` binary: configuration loading and
//! validation, the scenario implementations, and the report formats.

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{validate, Diagnostic, OutputFormat, RawConfig, Scenario, ScenarioConfig};
pub use report::{Cell, Check, RunReport};
pub use scenarios::run;
