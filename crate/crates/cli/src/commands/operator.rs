use phasebell::bell::SignPattern;
use phasebell::grid::Axis;
use phasebell::operator::{
    build_chis, build_p, check_p2_identity, flip, lanczos_extremes, negativity_witness, p_one_minus_p,
    spectrum_bounds, specs_from_pattern, ProjectorSpec, Representation, Spectrum,
};
use phasebell::state::WaveFunction2D;
use serde_json::Value;

use super::square_axes;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

pub const IDENTITY_TOL: f64 = 1e-10;
pub const WITNESS_TOL: f64 = 1e-10;
/// Dense refinement grids; the next size up is matrix-free.
pub const REFINEMENT: [usize; 3] = [8, 16, 32];
pub const LANCZOS_N: usize = 64;

/// The pattern's sets with `χ'1, χ'2` moved to the position representation,
/// so that all four projectors commute.
pub fn all_position(specs: &[ProjectorSpec; 4]) -> [ProjectorSpec; 4] {
    let mut out = specs.clone();
    for s in &mut out[2..] {
        s.representation = Representation::Position;
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DenseChecks {
    pub n: usize,
    pub hermiticity: f64,
    pub identity_residual: f64,
    pub spectrum: Spectrum,
}

pub fn dense_checks(specs: &[ProjectorSpec; 4], axes: [Axis; 2]) -> Result<DenseChecks> {
    let p = build_p(specs, axes)?;
    let chis = build_chis(specs, axes)?;
    Ok(DenseChecks {
        n: axes[0].len(),
        hermiticity: p.hermiticity_residual(),
        identity_residual: check_p2_identity(&p, &chis)?,
        spectrum: spectrum_bounds(&p)?,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct WitnessChecks {
    pub report: phasebell::operator::WitnessReport,
    /// `⟨P̂(1-P̂)⟩` with `Φ1` replaced by its flip.
    pub flipped_value: f64,
}

pub fn witness_checks(specs: &[ProjectorSpec; 4], axes: [Axis; 2]) -> Result<WitnessChecks> {
    let w = negativity_witness(specs, axes)?;
    let [c1, ..] = build_chis(specs, axes)?;
    let [phi1, phi2] = &w.factors;
    let flipped = WaveFunction2D::product(&flip(phi1, &c1)?, phi2);
    Ok(WitnessChecks {
        report: w.report(specs),
        flipped_value: p_one_minus_p(&flipped, specs)?,
    })
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let pattern: SignPattern = config.pattern_spec();
    let specs = specs_from_pattern(&pattern);
    let half = config.box_half_width.expect("resolved");
    let axes = square_axes(config.grid_n(), half)?;
    b.result("pattern", &pattern.to_string());

    match dense_checks(&specs, axes) {
        Ok(d) => {
            b.le("P hermitian", d.hermiticity, IDENTITY_TOL);
            b.le("P^2 identity residual", d.identity_residual, IDENTITY_TOL);
            b.lt("lambda_min < 0", d.spectrum.lambda_min, 0.0);
            b.le("eigenpair residual", d.spectrum.residual, 1e-8);
            b.result("dense", &d);
        }
        Err(e) => {
            b.error("dense operator", e);
        }
    }

    match witness_checks(&specs, axes) {
        Ok(w) => {
            b.lt("witness value < 0", w.report.value, 0.0);
            b.le("witness equals -R1 R2", w.report.product_residual, WITNESS_TOL);
            b.le("flip of Phi1 negates witness", (w.flipped_value + w.report.value).abs(), WITNESS_TOL);
            b.result("witness", &w);
        }
        Err(e) => {
            b.error("witness", e);
        }
    }

    let commuting = all_position(&specs);
    match dense_checks(&commuting, axes) {
        Ok(d) => {
            // P is diagonal here, so the max norm of P² - P bounds every eigenvalue's
            // distance to {0, 1}.
            b.le("all-position P^2 = P", d.identity_residual, IDENTITY_TOL);
            b.ge("all-position lambda_min >= 0", d.spectrum.lambda_min, -IDENTITY_TOL);
            b.le("all-position lambda_max <= 1", d.spectrum.lambda_max, 1.0 + IDENTITY_TOL);
            b.result("all_position", &d);
        }
        Err(e) => {
            b.error("all-position operator", e);
        }
    }

    let mut table = Table::new(
        "refinement",
        &["n", "method", "identity_residual", "lambda_min", "lambda_max", "eig_residual", "witness", "note"],
    );
    for n in REFINEMENT {
        let ax = square_axes(n, half)?;
        let dense = dense_checks(&specs, ax);
        let witness = negativity_witness(&specs, ax).map(|w| w.value);
        let note = [dense.as_ref().err().map(|e| e.to_string()), witness.as_ref().err().map(|e| e.to_string())]
            .into_iter()
            .flatten()
            .collect::<Vec<_>>()
            .join("; ");
        let d = dense.as_ref().ok();
        table.push(vec![
            n.into(),
            "dense".into(),
            num(d.map(|d| d.identity_residual)),
            num(d.map(|d| d.spectrum.lambda_min)),
            num(d.map(|d| d.spectrum.lambda_max)),
            num(d.map(|d| d.spectrum.residual)),
            num(witness.as_ref().ok().copied()),
            Value::String(note),
        ]);
        if let Some(d) = d {
            b.le(&format!("n = {n}: P^2 identity residual"), d.identity_residual, IDENTITY_TOL);
        }
    }
    let ax = square_axes(LANCZOS_N, half)?;
    let lanczos = lanczos_extremes(&specs, ax, 600, 1e-8, config.seed);
    let witness = negativity_witness(&specs, ax).map(|w| w.value);
    let l = lanczos.as_ref().ok();
    table.push(vec![
        LANCZOS_N.into(),
        "lanczos".into(),
        Value::Null,
        num(l.map(|s| s.lambda_min)),
        num(l.map(|s| s.lambda_max)),
        num(l.map(|s| s.residual)),
        num(witness.as_ref().ok().copied()),
        Value::String(lanczos.as_ref().err().map(|e| e.to_string()).unwrap_or_default()),
    ]);
    b.table(table);
    Ok(b.finish())
}
