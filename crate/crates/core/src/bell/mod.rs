//! The four-term Bell functional on phase-space marginals.
//!
//! With `χ` the indicator of a set, the sign functions are
//! `r = (2χ1-1)(2χ2-1)`, `s = (2χ1-1)(2χ'2-1)`, `t = (2χ'1-1)(2χ2-1)` and
//! `u = -(2χ'1-1)(2χ'2-1)`; their sum is `±2` everywhere, so any
//! nonnegative density with the given marginals has `|S| ≤ 2`.

mod large_l;
mod pattern;

pub use large_l::{
    beta_momentum, beta_position, large_l_s, s_from_beta, LargeL, LargeLRoute,
};
pub use pattern::{SetSpec, SignPattern, VARIABLE_NAMES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Atom, AtomicDistribution2D, Axis, RealField2D, VariablePair};
use crate::state::{Marginal, MarginalQuartet, Provenance, WaveFunction2D};

/// Pointwise sign functions of a pattern.
#[derive(Debug, Clone, Copy)]
pub struct BellFunctions<'a> {
    pattern: &'a SignPattern,
}

pub fn bell_functions(pattern: &SignPattern) -> BellFunctions<'_> {
    BellFunctions { pattern }
}

fn sign(inside: bool) -> f64 {
    if inside {
        1.0
    } else {
        -1.0
    }
}

impl BellFunctions<'_> {
    fn sgn(&self, var: usize, x: f64) -> Result<f64> {
        Ok(sign(self.pattern.set(var).contains(x)?))
    }

    pub fn r(&self, q1: f64, q2: f64) -> Result<f64> {
        Ok(self.sgn(0, q1)? * self.sgn(1, q2)?)
    }

    pub fn s(&self, q1: f64, p2: f64) -> Result<f64> {
        Ok(self.sgn(0, q1)? * self.sgn(3, p2)?)
    }

    pub fn t(&self, p1: f64, q2: f64) -> Result<f64> {
        Ok(self.sgn(2, p1)? * self.sgn(1, q2)?)
    }

    pub fn u(&self, p1: f64, p2: f64) -> Result<f64> {
        Ok(-self.sgn(2, p1)? * self.sgn(3, p2)?)
    }

    /// `r + s + t + u` at `(q1, q2, p1, p2)`.
    pub fn sum(&self, [q1, q2, p1, p2]: [f64; 4]) -> Result<f64> {
        Ok(self.r(q1, q2)? + self.s(q1, p2)? + self.t(p1, q2)? + self.u(p1, p2)?)
    }

    /// The function paired with one of the four marginals.
    pub fn term(&self, pair: VariablePair, x: f64, y: f64) -> Result<f64> {
        match pair {
            VariablePair::QQ => self.r(x, y),
            VariablePair::QP => self.s(x, y),
            VariablePair::PQ => self.t(x, y),
            VariablePair::PP => self.u(x, y),
        }
    }
}

/// `P = χ1 + χ2 + χ'1χ'2 - χ1χ2 - χ1χ'2 - χ'1χ2` for indicators
/// `[χ1, χ2, χ'1, χ'2]`.
pub fn classical_p(chi: [bool; 4]) -> i32 {
    let [a, b, c, d] = chi.map(i32::from);
    a + b + c * d - a * b - a * d - c * b
}

pub fn classical_p_at(pattern: &SignPattern, point: [f64; 4]) -> Result<i32> {
    Ok(classical_p(pattern.indicators(point)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellTerms {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub u: f64,
}

impl BellTerms {
    pub fn total(&self) -> f64 {
        self.r + self.s + self.t + self.u
    }

    pub fn get(&self, pair: VariablePair) -> f64 {
        match pair {
            VariablePair::QQ => self.r,
            VariablePair::QP => self.s,
            VariablePair::PQ => self.t,
            VariablePair::PP => self.u,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    #[serde(rename = "S")]
    pub s: f64,
    pub terms: BellTerms,
    pub pattern: String,
    pub provenance: Provenance,
    /// `exact` when every marginal is atomic, `grid` otherwise.
    pub method: String,
    /// Quadrature or discretisation error estimate, when one is known.
    pub error_estimate: Option<f64>,
    /// `2 - 4⟨P̂⟩` from the projector route, for quantum inputs.
    pub operator_check: Option<f64>,
}

impl BellReport {
    pub fn new(terms: BellTerms, pattern: &SignPattern, provenance: Provenance, method: &str) -> Self {
        BellReport {
            s: terms.total(),
            terms,
            pattern: pattern.to_string(),
            provenance,
            method: method.to_string(),
            error_estimate: None,
            operator_check: None,
        }
    }

    pub fn violates_bound(&self) -> bool {
        self.s.abs() > 2.0
    }
}

fn grid_term(field: &RealField2D, pattern: &SignPattern, pair: VariablePair) -> Result<f64> {
    let [va, vb] = pair.axes();
    let ia = pattern.set(va).indicator(field.axis(0))?;
    let ib = pattern.set(vb).indicator(field.axis(1))?;
    let n1 = ib.len();
    let mut sum = 0.0;
    for (i, &a) in ia.iter().enumerate() {
        let row = &field.values()[i * n1..(i + 1) * n1];
        let sa = sign(a);
        for (&b, &v) in ib.iter().zip(row) {
            sum += sa * sign(b) * v;
        }
    }
    let outer = if pair == VariablePair::PP { -1.0 } else { 1.0 };
    Ok(outer * sum * field.cell_volume())
}

fn atomic_term(dist: &AtomicDistribution2D, pattern: &SignPattern, pair: VariablePair) -> Result<f64> {
    let f = bell_functions(pattern);
    dist.atoms()
        .iter()
        .map(|a| Ok(a.weight * f.term(pair, a.point.0, a.point.1)?))
        .sum()
}

/// Checks that grid marginals sharing a variable use the same axis for it.
fn check_axes(quartet: &MarginalQuartet) -> Result<()> {
    let mut seen: [Option<Axis>; 4] = [None; 4];
    for pair in VariablePair::ALL {
        if let Marginal::Grid(g) = quartet.get(pair) {
            for (slot, var) in pair.axes().into_iter().enumerate() {
                let axis = *g.axis(slot);
                match seen[var] {
                    Some(prev) if prev != axis => {
                        return Err(Error::AxisMismatch(format!(
                            "variable {} has different axes across marginals",
                            VARIABLE_NAMES[var]
                        )))
                    }
                    _ => seen[var] = Some(axis),
                }
            }
        }
    }
    Ok(())
}

/// `S = ∫ r σ_qq + ∫ s σ_qp + ∫ t σ_pq + ∫ u σ_pp`.
///
/// Grid marginals are summed with the midpoint rule (exact for the sampled
/// densities); atomic marginals are summed exactly over their atoms.
pub fn bell_s(quartet: &MarginalQuartet, pattern: &SignPattern) -> Result<BellReport> {
    check_axes(quartet)?;
    let mut values = [0.0; 4];
    let mut all_atomic = true;
    for (slot, pair) in VariablePair::ALL.into_iter().enumerate() {
        values[slot] = match quartet.get(pair) {
            Marginal::Grid(g) => {
                all_atomic = false;
                grid_term(g, pattern, pair)?
            }
            Marginal::Atomic(a) => atomic_term(a, pattern, pair)?,
        };
    }
    let terms = BellTerms {
        r: values[0],
        s: values[1],
        t: values[2],
        u: values[3],
    };
    let method = if all_atomic { "exact" } else { "grid" };
    Ok(BellReport::new(terms, pattern, quartet.provenance, method))
}

/// `S` of the quantum marginals of `ψ`, with the projector-route value
/// `2 - 4⟨ψ|P̂|ψ⟩` attached as a cross-check.
pub fn quantum_bell_s(psi: &WaveFunction2D, pattern: &SignPattern) -> Result<BellReport> {
    let mut report = bell_s(&psi.quantum_marginals(), pattern)?;
    let p = crate::operator::expectation_p(psi, pattern)?;
    report.operator_check = Some(2.0 - 4.0 * p);
    Ok(report)
}

/// Default atom positions `(a1, a2, a'1, a'2, b1, b2, b'1, b'2)`.
pub const COUNTEREXAMPLE_DEFAULT: [f64; 8] = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];

/// Four atomic marginals with weight 1/2 per atom:
/// `σ_qq` at `(a1,a2), (a'1,a'2)`; `σ_qp` at `(a1,b2), (a'1,b'2)`;
/// `σ_pq` at `(b1,a2), (b'1,a'2)`; `σ_pp` at `(b1,b'2), (b'1,b2)`.
pub fn counterexample_quartet(v: [f64; 8]) -> Result<MarginalQuartet> {
    let [a1, a2, a1p, a2p, b1, b2, b1p, b2p] = v;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidDistribution("atom positions must be finite".into()));
    }
    for (name, x, y) in [("a1", a1, a1p), ("a2", a2, a2p), ("b1", b1, b1p), ("b2", b2, b2p)] {
        if x == y {
            return Err(Error::InvalidDistribution(format!(
                "{name} and its primed value coincide at {x}"
            )));
        }
    }
    let pair = |p: (f64, f64), q: (f64, f64)| -> Result<Marginal> {
        Ok(Marginal::Atomic(AtomicDistribution2D::new(vec![
            Atom { point: p, weight: 0.5 },
            Atom { point: q, weight: 0.5 },
        ])?))
    };
    Ok(MarginalQuartet {
        qq: pair((a1, a2), (a1p, a2p))?,
        qp: pair((a1, b2), (a1p, b2p))?,
        pq: pair((b1, a2), (b1p, a2p))?,
        pp: pair((b1, b2p), (b1p, b2))?,
        provenance: Provenance::ClassicalConstructed,
    })
}

/// Half-line pattern whose sets contain the unprimed atoms and exclude the
/// primed ones, with thresholds at the midpoints.
pub fn aligned_pattern(v: [f64; 8]) -> Result<SignPattern> {
    let [a1, a2, a1p, a2p, b1, b2, b1p, b2p] = v;
    let set = |x: f64, xp: f64| {
        let threshold = 0.5 * (x + xp);
        if x < xp {
            SetSpec::Below { threshold }
        } else {
            SetSpec::Above { threshold }
        }
    };
    SignPattern::new([set(a1, a1p), set(a2, a2p), set(b1, b1p), set(b2, b2p)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RealField4D;
    use crate::state::{gaussian_1d, product_density, WaveFunction2D};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_line_signs_at_unit_point() {
        let p = SignPattern::theta();
        let f = bell_functions(&p);
        assert_eq!(f.r(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(f.s(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(f.t(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(f.u(1.0, 1.0).unwrap(), -1.0);
        assert!(f.r(0.0, 1.0).is_err());
    }

    #[test]
    fn classical_p_single_cases() {
        assert_eq!(classical_p([false; 4]), 0);
        assert_eq!(classical_p([true, false, false, false]), 1);
    }

    #[test]
    fn boolean_identity_exhaustive() {
        for bits in 0..16u8 {
            let chi = [0, 1, 2, 3].map(|k| bits >> k & 1 == 1);
            let p = classical_p(chi);
            let [a, b, c, d] = chi.map(sign);
            let sum = a * b + a * d + c * b - c * d;
            assert!(p == 0 || p == 1);
            assert_eq!(sum, 2.0 - 4.0 * p as f64);
        }
    }

    #[test]
    fn counterexample_gives_four() {
        let q = counterexample_quartet(COUNTEREXAMPLE_DEFAULT).unwrap();
        let rep = bell_s(&q, &aligned_pattern(COUNTEREXAMPLE_DEFAULT).unwrap()).unwrap();
        assert_eq!(rep.s, 4.0);
        assert_eq!(rep.method, "exact");
        assert!(counterexample_quartet([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn counterexample_one_axis_flipped_matches_enumeration() {
        let v = [0.3, -1.0, 2.0, 1.0, -0.5, 0.7, 0.1, -2.0];
        let q = counterexample_quartet(v).unwrap();
        let base = aligned_pattern(v).unwrap();
        let mut sets = base.sets().clone();
        sets[2] = sets[2].complement();
        let pat = SignPattern::new(sets).unwrap();
        // Oracle: enumerate the eight atoms by hand with explicit sign tables.
        let sg = |var: usize, x: f64| if pat.set(var).contains(x).unwrap() { 1.0 } else { -1.0 };
        let [a1, a2, a1p, a2p, b1, b2, b1p, b2p] = v;
        let expected = 0.5 * (sg(0, a1) * sg(1, a2) + sg(0, a1p) * sg(1, a2p))
            + 0.5 * (sg(0, a1) * sg(3, b2) + sg(0, a1p) * sg(3, b2p))
            + 0.5 * (sg(2, b1) * sg(1, a2) + sg(2, b1p) * sg(1, a2p))
            - 0.5 * (sg(2, b1) * sg(3, b2p) + sg(2, b1p) * sg(3, b2));
        assert_eq!(bell_s(&q, &pat).unwrap().s, expected);
        assert_eq!(expected, 0.0);
    }

    #[test]
    fn atom_on_boundary_is_rejected() {
        let q = counterexample_quartet(COUNTEREXAMPLE_DEFAULT).unwrap();
        let p = SignPattern::half_lines([0.0, 0.5, 0.5, 0.5]);
        assert!(bell_s(&q, &p).is_err());
    }

    #[test]
    fn counterexample_one_variable_marginals_agree() {
        let q = counterexample_quartet(COUNTEREXAMPLE_DEFAULT).unwrap();
        let (Marginal::Atomic(qq), Marginal::Atomic(qp)) = (&q.qq, &q.qp) else {
            panic!()
        };
        assert_eq!(qq.marginal(0), qp.marginal(0));
    }

    #[test]
    fn report_total_matches_terms_and_serializes() {
        let a = Axis::symmetric(16, 5.0).unwrap();
        let phi = gaussian_1d(a, 0.3, 1.0, 0.2).unwrap();
        let psi = WaveFunction2D::product(&phi, &phi);
        let rep = quantum_bell_s(&psi, &SignPattern::theta()).unwrap();
        assert!((rep.s - rep.terms.total()).abs() <= 1e-12);
        assert!(rep.s.abs() <= 2.0 + 1e-8);
        assert!((rep.operator_check.unwrap() - rep.s).abs() < 1e-9);
        let js = serde_json::to_value(&rep).unwrap();
        assert!(js.get("S").is_some());
        let back: BellReport = serde_json::from_value(js).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn mismatched_axes_rejected() {
        let a = Axis::symmetric(8, 5.0).unwrap();
        let b = Axis::symmetric(8, 4.0).unwrap();
        let g = |x: Axis, y: Axis| Marginal::Grid(RealField2D::filled([x, y], 1.0));
        let q = MarginalQuartet {
            qq: g(a, a),
            qp: g(b, a),
            pq: g(a, a),
            pp: g(a, a),
            provenance: Provenance::FromDensity,
        };
        assert!(matches!(bell_s(&q, &SignPattern::theta()), Err(Error::AxisMismatch(_))));
    }

    fn random_pattern(rng: &mut ChaCha8Rng, axes: &[Axis; 4]) -> SignPattern {
        let sets = std::array::from_fn(|k| {
            let ax = axes[k];
            let n = ax.len();
            match rng.random_range(0..3) {
                0 => {
                    let mut mask: Vec<bool> = (0..n).map(|_| rng.random()).collect();
                    mask[0] = true;
                    mask[n - 1] = false;
                    SetSpec::Mask { mask }
                }
                1 => SetSpec::Above { threshold: ax.point(rng.random_range(0..n - 1)) + 0.5 * ax.step() },
                _ => SetSpec::Below { threshold: ax.point(rng.random_range(0..n - 1)) + 0.5 * ax.step() },
            }
        });
        SignPattern::new(sets).unwrap()
    }

    #[test]
    fn complementing_every_set_leaves_s_unchanged() {
        let a = Axis::symmetric(16, 5.0).unwrap();
        let phi = gaussian_1d(a, 0.8, 0.7, -0.4).unwrap();
        let chi = gaussian_1d(a, -0.2, 1.3, 0.9).unwrap();
        let quartet = MarginalQuartet::from_density(&product_density(&phi, &chi));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let axes = [a, a, a.dual(), a.dual()];
            let p = random_pattern(&mut rng, &axes);
            let s1 = bell_s(&quartet, &p).unwrap().s;
            let s2 = bell_s(&quartet, &p.complemented()).unwrap().s;
            assert!((s1 - s2).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn bound_holds_for_explicit_densities(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = Axis::symmetric(8, 3.0).unwrap();
            let axes = [q, q, q.dual(), q.dual()];
            let mut rho = RealField4D::from_fn(axes, |_| rng.random::<f64>().powi(4));
            let mass = rho.integrate();
            rho.scale(1.0 / mass);
            let quartet = MarginalQuartet::from_density(&rho);
            let p = random_pattern(&mut rng, &axes);
            let rep = bell_s(&quartet, &p).unwrap();
            prop_assert!(rep.s.abs() <= 2.0 + 1e-9);
        }

        #[test]
        fn sign_sum_is_plus_minus_two(x in prop::array::uniform4(-10.0f64..10.0), t in prop::array::uniform4(-3.0f64..3.0)) {
            let p = SignPattern::half_lines(t);
            if let Ok(v) = bell_functions(&p).sum(x) {
                prop_assert!(v == 2.0 || v == -2.0);
                let pv = classical_p_at(&p, x).unwrap();
                prop_assert_eq!(v, 2.0 - 4.0 * pv as f64);
            }
        }
    }
}
