use phasebell::bell::{aligned_pattern, bell_functions, bell_s, counterexample_quartet, SignPattern, COUNTEREXAMPLE_DEFAULT};
use phasebell::grid::VariablePair;
use phasebell::marginal::{check_consistency, MarginalSet};
use phasebell::state::Marginal;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, ExperimentReport, ReportBuilder, Table};

/// Atom-by-atom contributions `weight · term(x, y)`.
fn atom_table(quartet: &phasebell::state::MarginalQuartet, pattern: &SignPattern, name: &str) -> Result<(Table, f64)> {
    let f = bell_functions(pattern);
    let mut t = Table::new(name, &["pair", "x", "y", "weight", "term", "contribution"]);
    let mut total = 0.0;
    for pair in VariablePair::ALL {
        let Marginal::Atomic(dist) = quartet.get(pair) else { continue };
        for atom in dist.atoms() {
            let term = f.term(pair, atom.point.0, atom.point.1)?;
            total += atom.weight * term;
            t.push(vec![
                Value::String(pair.name().into()),
                num(atom.point.0),
                num(atom.point.1),
                num(atom.weight),
                num(term),
                num(atom.weight * term),
            ]);
        }
    }
    Ok((t, total))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut b = ReportBuilder::new(config);
    let atoms = config.atoms.unwrap_or(COUNTEREXAMPLE_DEFAULT);
    let quartet = match counterexample_quartet(atoms) {
        Ok(q) => q,
        Err(e) => {
            b.error("atoms", e);
            return Ok(b.finish());
        }
    };
    b.result("atoms", &atoms);

    let consistency = check_consistency(MarginalSet::Quartet(&quartet));
    let mut table = Table::new("consistency", &["check", "residual", "pass"]);
    for c in &consistency.checks {
        table.push(vec![Value::String(c.name.clone()), num(c.residual), Value::Bool(c.pass)]);
    }
    b.table(table);
    let worst = consistency.checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    b.eq("consistency residual", worst, 0.0);

    let aligned = aligned_pattern(atoms)?;
    let report = bell_s(&quartet, &aligned)?;
    let (atoms_table, enumerated) = atom_table(&quartet, &aligned, "atoms-aligned")?;
    b.table(atoms_table);
    b.result("aligned", &report);
    b.eq("aligned S", report.s, 4.0);
    b.eq("atom enumeration matches S", enumerated, report.s);
    b.flag("violates |S| <= 2", report.violates_bound(), None);

    if let Some(spec) = &config.pattern {
        let pattern: SignPattern = spec.parse()?;
        match bell_s(&quartet, &pattern) {
            Ok(custom) => {
                let (t, enumerated) = atom_table(&quartet, &pattern, "atoms-pattern")?;
                b.table(t);
                b.eq("pattern S matches enumeration", custom.s, enumerated);
                b.result("pattern", &custom);
            }
            Err(e) => {
                b.error("pattern S", e);
            }
        }
    }
    Ok(b.finish())
}
