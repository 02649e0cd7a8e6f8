use phasebell::state::{wigner, wigner_at, StateSpec, WaveFunction2D};
use serde_json::Value;
use std::f64::consts::PI;

use super::square_axes;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

/// Smooth states checked when no `--state` is given.
pub fn default_catalog(seed: u64) -> Vec<StateSpec> {
    vec![
        StateSpec::Gaussian,
        StateSpec::Oscillator(0, 1),
        StateSpec::Oscillator(1, 2),
        StateSpec::Cat(1.5),
        StateSpec::Random(seed),
    ]
}

pub const MARGINAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct WignerSummary {
    pub position_residual: f64,
    pub momentum_residual: f64,
    pub integral: f64,
    pub min: f64,
    pub origin: f64,
}

/// `∫dp W` against `|ψ(q)|²` and `∫dq W` against `|ψ̃(p)|²` (max norm).
pub fn summarize(psi: &WaveFunction2D) -> Result<WignerSummary> {
    let w = wigner(psi);
    let reps = psi.mixed_representations();
    let position_residual = w.marginal([0, 1])?.max_abs_diff(&reps.qq.abs_sqr());
    let momentum_residual = w.marginal([2, 3])?.max_abs_diff(&reps.pp.abs_sqr());
    Ok(WignerSummary {
        position_residual,
        momentum_residual,
        integral: w.integrate(),
        min: w.min_value(),
        origin: wigner_at(psi, [0.0, 0.0], [0.0, 0.0])?,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let axes = square_axes(config.grid_n(), config.box_half_width.expect("resolved"))?;
    let states = match config.state_spec() {
        Some(s) => vec![s],
        None => default_catalog(config.seed),
    };
    let mut table = Table::new(
        "wigner",
        &["state", "position_residual", "momentum_residual", "integral", "min", "origin"],
    );
    for spec in states {
        let label = spec.to_string();
        let summary = match spec.build(axes).map_err(Into::into).and_then(|psi| summarize(&psi)) {
            Ok(s) => s,
            Err(e) => {
                b.error(&format!("{label}: build"), e);
                continue;
            }
        };
        table.push(vec![
            Value::String(label.clone()),
            num(summary.position_residual),
            num(summary.momentum_residual),
            num(summary.integral),
            num(summary.min),
            num(summary.origin),
        ]);
        b.le(&format!("{label}: position marginal"), summary.position_residual, MARGINAL_TOL);
        b.le(&format!("{label}: momentum marginal"), summary.momentum_residual, MARGINAL_TOL);
        b.le(&format!("{label}: normalisation"), (summary.integral - 1.0).abs(), 1e-8);
        match spec {
            StateSpec::Gaussian => {
                b.ge("gaussian: min", summary.min, -1e-10);
            }
            StateSpec::Oscillator(0, 1) => {
                let target = -1.0 / (PI * PI);
                b.le("ho:0,1: origin relative error", ((summary.origin - target) / target).abs(), 0.02);
                b.lt("ho:0,1: min", summary.min, 0.0);
            }
            _ => {}
        }
    }
    b.table(table);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn single_state_run() {
        let mut cfg = ExperimentConfig::new(Command::Wigner);
        cfg.state = Some("ho:0,1".into());
        cfg.n = Some(16);
        let r = run(&cfg.resolve().unwrap()).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        assert_eq!(r.table("wigner").unwrap().rows.len(), 1);
    }
}
