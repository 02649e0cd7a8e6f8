//! One module per experiment. Each `run` takes a resolved config and
//! returns a report; numerical failures become failed checks.

pub mod classical;
pub mod operator;
pub mod quantum;
pub mod selftest;
pub mod three_marginal;
pub mod wigner;

use phasebell::grid::Axis;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::report::ExperimentReport;

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.command {
        Command::ClassicalCounterexample => classical::run(config),
        Command::QuantumViolation => quantum::run(config),
        Command::OperatorChecks => operator::run(config),
        Command::ThreeMarginal => three_marginal::run(config),
        Command::Wigner => wigner::run(config),
        Command::Selftest => selftest::run(config),
    }
}

pub(crate) fn square_axes(n: usize, half_width: f64) -> Result<[Axis; 2]> {
    let a = Axis::symmetric(n, half_width)?;
    Ok([a, a])
}
