use serde_json::Value;

use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

pub const COMMANDS: [Command; 5] = [
    Command::ClassicalCounterexample,
    Command::QuantumViolation,
    Command::OperatorChecks,
    Command::ThreeMarginal,
    Command::Wigner,
];

/// Runs every experiment with its default configuration (sharing the seed,
/// sign and ε of `config`) and collects the sub-reports.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let mut table = Table::new("summary", &["command", "pass", "failures", "wall_time_s"]);
    let mut reports = Vec::new();
    for cmd in COMMANDS {
        let mut sub = ExperimentConfig::new(cmd);
        sub.seed = config.seed;
        sub.sign = config.sign;
        sub.epsilon = config.epsilon;
        let report = super::run(&sub.resolve()?)?;
        let failures: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
        table.push(vec![
            Value::String(cmd.name().into()),
            Value::Bool(report.pass),
            Value::String(failures.join("; ")),
            num(report.wall_time_s),
        ]);
        b.flag(cmd.name(), report.pass, (!failures.is_empty()).then(|| failures.join("; ")));
        reports.push(report);
    }
    b.table(table);
    b.result("reports", &reports);
    Ok(b.finish())
}
