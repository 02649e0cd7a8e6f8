use phasebell::grid::{Axis, RealField4D, VariablePair};
use phasebell::marginal::{
    chain_for, check_consistency, envelope, general_density_unchecked, one_var_marginals, random_f, represent, rho0,
    ConsistencyReport, MarginalSet, MarginalTriple, Rho0, SolutionFamily,
};
use phasebell::state::{ho_eigenstate, product_density, random_state, MarginalQuartet, StateSpec, WaveFunction2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::square_axes;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

pub const RHO0_TOL: f64 = 1e-5;
pub const PRODUCT_TOL: f64 = 1e-8;
pub const PROJECTION_TOL: f64 = 1e-9;
pub const NONNEG_TOL: f64 = 1e-12;
pub const BOUNDARY_TOL: f64 = 1e-9;
pub const ROUNDTRIP_TOL: f64 = 1e-8;
pub const M_MINUS_SLACK: f64 = 1e-9;
/// Correlation length of random `F`, in grid cells.
pub const F_CORRELATION: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyRow {
    pub index: usize,
    pub f_seed: u64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
    pub max_projection: f64,
    pub delta_integral: f64,
    /// Relative mismatch of the interval endpoints against a pointwise scan.
    pub scan_mismatch: f64,
    pub interior_lambda: f64,
    pub interior_min: f64,
    pub boundary_min: f64,
    pub over_rejected: bool,
    pub over_min: f64,
    pub roundtrip_lambda: f64,
    pub roundtrip_error: f64,
    pub roundtrip_m_minus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateOutcome {
    pub label: String,
    pub consistency: ConsistencyReport,
    pub one_var_discrepancy: Option<f64>,
    pub rho0_residuals: Option<[f64; 3]>,
    pub mass_deficit: Option<f64>,
    pub support_points: Option<usize>,
    pub product_error: Option<f64>,
    pub families: Vec<FamilyRow>,
    /// First construction error, if any step failed.
    pub error: Option<String>,
}

/// `(inf, sup)` of `Δ/ρ₀` over the support, computed independently of the
/// solver.
fn scan(delta: &RealField4D, r0: &Rho0) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &inside) in r0.support.mask().iter().enumerate() {
        if inside {
            let q = delta.values()[i] / r0.rho.values()[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    (lo, hi)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn min_on(field: &RealField4D, mask: &[bool]) -> f64 {
    field
        .values()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min)
}

pub fn family_row(triple: &MarginalTriple, r0: &Rho0, index: usize, f_seed: u64, epsilon: f64) -> Result<(FamilyRow, SolutionFamily)> {
    let f = envelope(&random_f(f_seed, &r0.support, F_CORRELATION), r0);
    let fam = SolutionFamily::build(triple, r0.clone(), &f, &format!("random_f(seed={f_seed}) x rho0"))?;
    let range = fam.range;
    let (lo, hi) = scan(&fam.delta, &fam.rho0);
    let scan_mismatch = rel(range.lower, -1.0 / hi).max(rel(range.upper, 1.0 / -lo));
    let mut rng = ChaCha8Rng::seed_from_u64(f_seed ^ 0x5eed);
    let mut draw = || range.lower + rng.random_range(0.05..0.95) * (range.upper - range.lower);
    let interior_lambda = draw();
    let roundtrip_lambda = draw();
    let interior_min = general_density_unchecked(&fam.rho0, &fam.delta, interior_lambda).min_value();
    let boundary = general_density_unchecked(&fam.rho0, &fam.delta, range.upper);
    let boundary_min = min_on(&boundary, fam.rho0.support.mask());
    let over = 1.1 * range.upper;
    let over_rejected = fam.density(over).is_err();
    let over_min = general_density_unchecked(&fam.rho0, &fam.delta, over).min_value();
    let rho1 = fam.density(roundtrip_lambda)?;
    let back = represent(&rho1, triple, epsilon)?;
    let roundtrip_error = back.density(1.0)?.max_abs_diff(&rho1);
    let roundtrip_m_minus = if back.range.degenerate { 0.0 } else { back.range.m_minus };
    let row = FamilyRow {
        index,
        f_seed,
        m_plus: range.m_plus,
        m_minus: range.m_minus,
        lower: range.lower,
        upper: range.upper,
        degenerate: range.degenerate,
        max_projection: fam.residuals.delta_projections.iter().copied().fold(0.0, f64::max),
        delta_integral: fam.residuals.delta_integral,
        scan_mismatch,
        interior_lambda,
        interior_min,
        boundary_min,
        over_rejected,
        over_min,
        roundtrip_lambda,
        roundtrip_error,
        roundtrip_m_minus,
    };
    Ok((row, fam))
}

/// The product-density oracle for separable catalog states.
fn product_oracle(spec: &StateSpec, axes: [Axis; 2]) -> Option<RealField4D> {
    let (m, n) = match spec {
        StateSpec::Gaussian => (0, 0),
        StateSpec::Oscillator(m, n) => (*m, *n),
        _ => return None,
    };
    let f = ho_eigenstate(axes[0], m).ok()?;
    let g = ho_eigenstate(axes[1], n).ok()?;
    Some(product_density(&f, &g))
}

/// Replaces the last chain marginal by the one of `random:<seed>`.
pub fn tamper(quartet: &mut MarginalQuartet, dropped: VariablePair, axes: [Axis; 2], seed: u64) -> Result<()> {
    let other = random_state(axes, seed)?.quantum_marginals();
    let (_, pairs) = chain_for(dropped);
    let target = pairs[2];
    let replacement = other.get(target).clone();
    match target {
        VariablePair::QQ => quartet.qq = replacement,
        VariablePair::QP => quartet.qp = replacement,
        VariablePair::PQ => quartet.pq = replacement,
        VariablePair::PP => quartet.pp = replacement,
    }
    Ok(())
}

/// Full suite for one quartet. Returns the outcome and, when the
/// construction got that far, the first family.
pub fn analyse(
    label: &str,
    quartet: &MarginalQuartet,
    oracle: Option<RealField4D>,
    config: &ExperimentConfig,
    families: usize,
) -> (StateOutcome, Option<SolutionFamily>) {
    let consistency = check_consistency(MarginalSet::Quartet(quartet));
    let mut out = StateOutcome {
        label: label.into(),
        consistency,
        one_var_discrepancy: None,
        rho0_residuals: None,
        mass_deficit: None,
        support_points: None,
        product_error: None,
        families: Vec::new(),
        error: None,
    };
    if !out.consistency.pass {
        out.error = Some("marginals are inconsistent; construction aborted".into());
        return (out, None);
    }
    let mut first = None;
    let result = (|| -> Result<()> {
        let triple = MarginalTriple::from_quartet(quartet, config.drop_marginal)?;
        out.one_var_discrepancy = Some(one_var_marginals(&triple)?.discrepancy.into_iter().fold(0.0, f64::max));
        let r0 = rho0(&triple, config.epsilon)?;
        let [v0, v1, v2, v3] = triple.chain();
        let mut res = [0.0; 3];
        for (k, (sel, f)) in [[v0, v1], [v2, v1], [v2, v3]].into_iter().zip(triple.fields()).enumerate() {
            res[k] = r0.rho.marginal(sel)?.l1_diff(f);
        }
        out.rho0_residuals = Some(res);
        out.mass_deficit = Some(r0.mass_deficit);
        out.support_points = Some(r0.support.count());
        out.product_error = oracle.map(|o| o.max_abs_diff(&r0.rho));
        for k in 0..families {
            let f_seed = config.seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
            let (row, fam) = family_row(&triple, &r0, k, f_seed, config.epsilon)?;
            out.families.push(row);
            if first.is_none() {
                first = Some(fam);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        out.error = Some(e.to_string());
    }
    (out, first)
}

/// Adds the pass/fail flags for one outcome, names prefixed by `prefix`.
pub fn record(b: &mut ReportBuilder, o: &StateOutcome, prefix: &str) {
    let name = |s: &str| format!("{prefix}{s}");
    b.flag(&name("consistency"), o.consistency.pass, None);
    if let Some(e) = &o.error {
        b.error(&name("construction"), e);
    }
    if let Some(d) = o.one_var_discrepancy {
        b.le(&name("one-variable marginals agree"), d, 1e-8);
    }
    if let Some(r) = o.rho0_residuals {
        b.le(&name("rho0 marginal residual"), r.iter().copied().fold(0.0, f64::max), RHO0_TOL);
    }
    if let Some(p) = o.product_error {
        b.le(&name("rho0 equals product density"), p, PRODUCT_TOL);
    }
    if o.families.is_empty() {
        return;
    }
    let fold = |f: fn(&FamilyRow) -> f64| o.families.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let least = |f: fn(&FamilyRow) -> f64| o.families.iter().map(f).fold(f64::INFINITY, f64::min);
    b.flag(&name("families non-degenerate"), o.families.iter().all(|r| !r.degenerate && r.m_plus > 0.0 && r.m_minus > 0.0), None);
    b.le(&name("(a) delta projections"), fold(|r| r.max_projection), PROJECTION_TOL);
    b.le(&name("(a) delta integral"), fold(|r| r.delta_integral.abs()), PROJECTION_TOL);
    b.le(&name("(b) interval matches scan"), fold(|r| r.scan_mismatch), 1e-12);
    b.ge(&name("(c) interior lambda nonnegative"), least(|r| r.interior_min), -NONNEG_TOL);
    b.le(&name("boundary lambda touches zero"), fold(|r| r.boundary_min.abs()), BOUNDARY_TOL);
    b.flag(&name("(d) 1.1/m- rejected"), o.families.iter().all(|r| r.over_rejected), None);
    b.lt(&name("(d) 1.1/m- negative"), fold(|r| r.over_min), 0.0);
    b.le(&name("(e) represent round trip"), fold(|r| r.roundtrip_error), ROUNDTRIP_TOL);
    b.le(&name("(e) represent m- <= 1"), fold(|r| r.roundtrip_m_minus), 1.0 + M_MINUS_SLACK);
}

pub fn family_table(name: &str, outcomes: &[&StateOutcome]) -> Table {
    let mut t = Table::new(
        name,
        &[
            "state", "family", "m_plus", "m_minus", "lambda_lower", "lambda_upper", "max_projection", "scan_mismatch",
            "interior_min", "boundary_min", "over_min", "roundtrip_error", "roundtrip_m_minus",
        ],
    );
    for o in outcomes {
        for r in &o.families {
            t.push(vec![
                Value::String(o.label.clone()),
                r.index.into(),
                num(r.m_plus),
                num(r.m_minus),
                num(r.lower),
                num(r.upper),
                num(r.max_projection),
                num(r.scan_mismatch),
                num(r.interior_min),
                num(r.boundary_min),
                num(r.over_min),
                num(r.roundtrip_error),
                num(r.roundtrip_m_minus),
            ]);
        }
    }
    t
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let spec = config.state_spec().expect("resolved");
    let half = config.box_half_width.unwrap_or_else(|| spec.natural_half_width());
    let axes = square_axes(config.grid_n(), half)?;
    let psi: WaveFunction2D = match spec.build(axes) {
        Ok(p) => p,
        Err(e) => {
            b.error("state", e);
            return Ok(b.finish());
        }
    };
    let mut quartet = psi.quantum_marginals();
    let mut label = spec.to_string();
    if let Some(seed) = config.tamper_seed {
        tamper(&mut quartet, config.drop_marginal, axes, seed)?;
        label = format!("{label} (tampered with random:{seed})");
    }
    let (outcome, first) = analyse(&label, &quartet, product_oracle(&spec, axes), config, config.families);

    let mut ct = Table::new("consistency", &["check", "residual", "pass"]);
    for c in &outcome.consistency.checks {
        ct.push(vec![Value::String(c.name.clone()), num(c.residual), Value::Bool(c.pass)]);
    }
    b.table(ct);
    b.table(family_table("families", &[&outcome]));
    record(&mut b, &outcome, "");
    b.result("box", &half);
    b.result("outcome", &serde_json::json!({
        "rho0_residuals": outcome.rho0_residuals,
        "mass_deficit": outcome.mass_deficit,
        "support_points": outcome.support_points,
        "one_var_discrepancy": outcome.one_var_discrepancy,
        "product_error": outcome.product_error,
        "error": outcome.error,
    }));
    if let (Some(dir), Some(fam)) = (&config.out, first) {
        let manifest = fam.write(&dir.join("family-0"))?;
        b.result("family_manifest", &manifest);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    fn cfg(state: &str, n: usize, families: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Command::ThreeMarginal);
        c.state = Some(state.into());
        c.n = Some(n);
        c.families = families;
        c.resolve().unwrap()
    }

    #[test]
    fn gaussian_passes_with_product_oracle() {
        let r = run(&cfg("gaussian", 16, 3)).unwrap();
        assert!(r.pass, "{:?}", r.failures());
        assert!(r.check("rho0 equals product density").is_some());
    }

    #[test]
    fn tampered_triple_aborts() {
        let mut c = cfg("gaussian", 8, 2);
        c.tamper_seed = Some(4);
        let r = run(&c).unwrap();
        assert!(!r.pass);
        assert!(!r.check("consistency").unwrap().pass);
        assert!(r.table("families").unwrap().rows.is_empty());
    }

    #[test]
    fn other_chain_ordering() {
        let mut c = cfg("random:3", 8, 2);
        c.drop_marginal = VariablePair::PP;
        let r = run(&c).unwrap();
        assert!(r.pass, "{:?}", r.failures());
    }
}
