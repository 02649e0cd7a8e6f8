//! Nonnegative phase-space densities with three prescribed two-variable
//! marginals.
//!
//! Three marginals always form a chain `v0 - v1 - v2 - v3` through the four
//! phase-space variables: `A(v0, v1)`, `B(v2, v1)`, `C(v2, v3)`. Dropping
//! `σ_qp` gives `σ_qq(q1,q2)`, `σ_pq(p1,q2)`, `σ_pp(p1,p2)`; the other
//! choices are relabelings of the same construction.

mod solver;

pub use solver::{
    delta_from_f, envelope, general_density, general_density_unchecked, lambda_range, random_f,
    represent, rho0, FamilyManifest, LambdaRange, ResidualTable, Rho0, SolutionFamily, SupportSet,
    MASS_LOSS_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, RealField1D, RealField2D, VariablePair};
use crate::state::{Marginal, MarginalQuartet};

/// L¹ tolerance for chain consistency of a triple.
pub const CHAIN_TOL: f64 = 1e-9;
/// Tolerance on normalisation of each input density.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTriple {
    dropped: VariablePair,
    a: RealField2D,
    b: RealField2D,
    c: RealField2D,
}

/// `(v0, v1, v2, v3)` as `(q1, q2, p1, p2)` axis indices, and the pairs
/// holding `A`, `B`, `C`.
pub fn chain_for(dropped: VariablePair) -> ([usize; 4], [VariablePair; 3]) {
    use VariablePair::*;
    match dropped {
        QP => ([0, 1, 2, 3], [QQ, PQ, PP]),
        QQ => ([0, 3, 2, 1], [QP, PP, PQ]),
        PQ => ([2, 3, 0, 1], [PP, QP, QQ]),
        PP => ([2, 1, 0, 3], [PQ, QQ, QP]),
    }
}

impl MarginalTriple {
    /// Builds the triple left after dropping one marginal. `fields` are the
    /// remaining three in chain order (see [`chain_for`]).
    pub fn new(dropped: VariablePair, fields: [RealField2D; 3]) -> Result<Self> {
        let [a, b, c] = fields;
        if a.axis(1) != b.axis(1) || b.axis(0) != c.axis(0) {
            return Err(Error::AxisMismatch("chain marginals disagree on a shared axis".into()));
        }
        let triple = MarginalTriple { dropped, a, b, c };
        for (name, f) in triple.named() {
            if f.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidDistribution(format!("{name} is negative or not finite")));
            }
            let mass = f.integrate();
            if (mass - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidDistribution(format!("{name} has mass {mass}")));
            }
        }
        let [r1, r2] = triple.chain_residuals();
        if r1 > CHAIN_TOL || r2 > CHAIN_TOL {
            return Err(Error::Inconsistent(format!(
                "chain residuals {r1:.3e}, {r2:.3e} exceed {CHAIN_TOL:.0e}"
            )));
        }
        Ok(triple)
    }

    /// The default triple `σ_qq, σ_pq, σ_pp`, with `σ_qp` left out.
    pub fn standard(qq: RealField2D, pq: RealField2D, pp: RealField2D) -> Result<Self> {
        Self::new(VariablePair::QP, [qq, pq, pp])
    }

    pub fn from_quartet(quartet: &MarginalQuartet, dropped: VariablePair) -> Result<Self> {
        let (_, pairs) = chain_for(dropped);
        let get = |p: VariablePair| -> Result<RealField2D> {
            quartet
                .get(p)
                .as_grid()
                .cloned()
                .ok_or_else(|| Error::InvalidDistribution(format!("{} is not a grid marginal", p.name())))
        };
        Self::new(dropped, [get(pairs[0])?, get(pairs[1])?, get(pairs[2])?])
    }

    pub fn dropped(&self) -> VariablePair {
        self.dropped
    }

    pub fn chain(&self) -> [usize; 4] {
        chain_for(self.dropped).0
    }

    pub fn fields(&self) -> [&RealField2D; 3] {
        [&self.a, &self.b, &self.c]
    }

    fn named(&self) -> [(&'static str, &RealField2D); 3] {
        let (_, pairs) = chain_for(self.dropped);
        [
            (pairs[0].name(), &self.a),
            (pairs[1].name(), &self.b),
            (pairs[2].name(), &self.c),
        ]
    }

    /// Axes of the 4D grid in `(q1, q2, p1, p2)` order.
    pub fn axes4(&self) -> [Axis; 4] {
        let chain = self.chain();
        let v = [*self.a.axis(0), *self.a.axis(1), *self.b.axis(0), *self.c.axis(1)];
        let mut out = v;
        for i in 0..4 {
            out[chain[i]] = v[i];
        }
        out
    }

    fn one_var_routes(&self) -> [[RealField1D; 2]; 2] {
        let m = |f: &RealField2D, k: usize| f.marginal([k]).expect("axis exists");
        [[m(&self.a, 1), m(&self.b, 1)], [m(&self.b, 0), m(&self.c, 0)]]
    }

    fn chain_residuals(&self) -> [f64; 2] {
        let [[s1a, s1b], [s2a, s2b]] = self.one_var_routes();
        [s1a.l1_diff(&s1b), s2a.l1_diff(&s2b)]
    }
}

/// One-variable marginals on the two inner chain variables, averaged over
/// their two parents.
#[derive(Debug, Clone)]
pub struct OneVar {
    /// On `v1` (`q2` in the standard chain).
    pub s1: RealField1D,
    /// On `v2` (`p1` in the standard chain).
    pub s2: RealField1D,
    /// L¹ distance between the two parent routes.
    pub discrepancy: [f64; 2],
}

pub fn one_var_marginals(triple: &MarginalTriple) -> Result<OneVar> {
    let [[s1a, s1b], [s2a, s2b]] = triple.one_var_routes();
    let discrepancy = [s1a.l1_diff(&s1b), s2a.l1_diff(&s2b)];
    if discrepancy.iter().any(|&d| d > CHAIN_TOL) {
        return Err(Error::Inconsistent(format!("one-variable routes differ by {discrepancy:?}")));
    }
    let avg = |x: RealField1D, y: &RealField1D| {
        let mut out = x;
        for (o, v) in out.values_mut().iter_mut().zip(y.values()) {
            *o = 0.5 * (*o + v);
        }
        out
    };
    Ok(OneVar {
        s1: avg(s1a, &s1b),
        s2: avg(s2a, &s2b),
        discrepancy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ConsistencyReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        ConsistencyReport { checks, pass }
    }
}

pub enum MarginalSet<'a> {
    Quartet(&'a MarginalQuartet),
    Triple(&'a MarginalTriple),
}

/// Tolerance used for pass flags in [`check_consistency`].
pub const CONSISTENCY_TOL: f64 = 1e-8;

fn check(name: String, residual: f64) -> Check {
    Check {
        pass: residual <= CONSISTENCY_TOL,
        name,
        residual,
    }
}

fn atomic_l1(x: &[(f64, f64)], y: &[(f64, f64)]) -> f64 {
    let mut points: Vec<f64> = x.iter().chain(y).map(|p| p.0).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let w = |s: &[(f64, f64)], p: f64| s.iter().find(|q| q.0 == p).map_or(0.0, |q| q.1);
    points.iter().map(|&p| (w(x, p) - w(y, p)).abs()).sum()
}

fn marginal_1d_residual(x: &Marginal, kx: usize, y: &Marginal, ky: usize) -> f64 {
    match (x, y) {
        (Marginal::Grid(a), Marginal::Grid(b)) => {
            let ma = a.marginal([kx]).expect("axis exists");
            let mb = b.marginal([ky]).expect("axis exists");
            if ma.axes() != mb.axes() {
                return f64::INFINITY;
            }
            ma.l1_diff(&mb)
        }
        (Marginal::Atomic(a), Marginal::Atomic(b)) => atomic_l1(&a.marginal(kx), &b.marginal(ky)),
        _ => f64::INFINITY,
    }
}

fn positivity_and_mass(name: &str, m: &Marginal) -> [Check; 2] {
    let (neg, mass) = match m {
        Marginal::Grid(g) => ((-g.min_value()).max(0.0), g.integrate()),
        Marginal::Atomic(a) => (0.0, a.atoms().iter().map(|x| x.weight).sum()),
    };
    [
        check(format!("{name} nonnegative"), neg),
        check(format!("{name} normalised"), (mass - 1.0).abs()),
    ]
}

/// Nonnegativity, normalisation and shared one-variable marginals, with L¹
/// residuals. Failures are report entries.
pub fn check_consistency(set: MarginalSet<'_>) -> ConsistencyReport {
    use VariablePair::*;
    let mut checks = Vec::new();
    match set {
        MarginalSet::Quartet(q) => {
            for p in VariablePair::ALL {
                checks.extend(positivity_and_mass(p.name(), q.get(p)));
            }
            for (name, x, kx, y, ky) in [
                ("q1: qq vs qp", QQ, 0, QP, 0),
                ("q2: qq vs pq", QQ, 1, PQ, 1),
                ("p1: pq vs pp", PQ, 0, PP, 0),
                ("p2: qp vs pp", QP, 1, PP, 1),
            ] {
                checks.push(check(name.into(), marginal_1d_residual(q.get(x), kx, q.get(y), ky)));
            }
        }
        MarginalSet::Triple(t) => {
            for (name, f) in t.named() {
                checks.extend(positivity_and_mass(name, &Marginal::Grid(f.clone())));
            }
            let [r1, r2] = t.chain_residuals();
            checks.push(check("chain inner variable 1".into(), r1));
            checks.push(check("chain inner variable 2".into(), r2));
        }
    }
    ConsistencyReport::from_checks(checks)
}
