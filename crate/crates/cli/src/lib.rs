//! Named, reproducible experiments over the `phasebell` library, each
//! producing a JSON report with pass/fail flags.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use config::{Command, ExperimentConfig, Format};
pub use error::{CliError, Result};
pub use report::{ExperimentReport, ReportBuilder, Table};
