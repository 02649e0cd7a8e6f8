use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{apply_p, build_chis, DiscreteOperator, ProjectorSpec};
use crate::error::{Error, Result};
use crate::grid::{Axis, ComplexField1D};
use crate::state::{gaussian_1d, WaveFunction1D, WaveFunction2D};

fn column(phi: &WaveFunction1D) -> DVector<Complex64> {
    DVector::from_column_slice(phi.amplitudes().values())
}

/// `R[Φ] = ⟨Φ|i[χ̂, χ̂']|Φ⟩ = -2 Im⟨χ̂Φ|χ̂'Φ⟩`.
pub fn r_functional(phi: &WaveFunction1D, chi: &DiscreteOperator, chi_prime: &DiscreteOperator) -> Result<f64> {
    if chi.axes() != [phi.axis()] || chi_prime.axes() != [phi.axis()] {
        return Err(Error::AxisMismatch("R functional needs 1D factors on the state axis".into()));
    }
    let x = column(phi);
    let v = chi.matrix() * &x;
    let w = chi_prime.matrix() * &x;
    Ok(-2.0 * v.dotc(&w).im * phi.axis().step())
}

/// `(2χ̂ - 1)Φ = Φ⁺ - Φ⁻`.
pub fn flip(phi: &WaveFunction1D, chi: &DiscreteOperator) -> Result<WaveFunction1D> {
    let x = column(phi);
    let y = (chi.matrix() * &x) * Complex64::new(2.0, 0.0) - x;
    WaveFunction1D::new(ComplexField1D::from_values([phi.axis()], y.iter().copied().collect())?)
}

/// Real Gaussians with centres `-2..=2` and widths `0.5, 1, 2`.
pub fn witness_catalog(axis: Axis) -> Result<Vec<(String, WaveFunction1D)>> {
    let mut out = Vec::new();
    for c in -2..=2 {
        for w in [0.5, 1.0, 2.0] {
            out.push((format!("gauss(c={c},w={w})"), gaussian_1d(axis, c as f64, w, 0.0)?));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub psi: WaveFunction2D,
    /// `Φ1, Φ2` with `psi = Φ1⊗Φ2`.
    pub factors: [WaveFunction1D; 2],
    pub phi1: String,
    pub phi2: String,
    /// `⟨Ψ|P̂(1-P̂)|Ψ⟩`.
    pub value: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Witness {
    pub fn report(&self, specs: &[ProjectorSpec; 4]) -> WitnessReport {
        WitnessReport {
            phi1: self.phi1.clone(),
            phi2: self.phi2.clone(),
            value: self.value,
            r1: self.r1,
            r2: self.r2,
            product_residual: (self.value + self.r1 * self.r2).abs(),
            axes: self.psi.axes(),
            specs: specs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub phi1: String,
    pub phi2: String,
    pub value: f64,
    pub r1: f64,
    pub r2: f64,
    /// `|value + R1·R2|`.
    pub product_residual: f64,
    pub axes: [Axis; 2],
    pub specs: [ProjectorSpec; 4],
}

/// `⟨Ψ|P̂(1-P̂)|Ψ⟩ = ⟨Ψ|P̂Ψ⟩ - ‖P̂Ψ‖²`.
pub fn p_one_minus_p(psi: &WaveFunction2D, specs: &[ProjectorSpec; 4]) -> Result<f64> {
    let pp = apply_p(psi.amplitudes(), specs)?;
    Ok(psi.amplitudes().inner(&pp).re - pp.norm_sqr())
}

/// Searches the Gaussian catalog and its flips, in order, for a product
/// state `Φ1⊗Φ2` with `R1·R2 > 0`, so that `⟨P̂(1-P̂)⟩ = -R1·R2 < 0`.
pub fn negativity_witness(specs: &[ProjectorSpec; 4], axes: [Axis; 2]) -> Result<Witness> {
    let [c1, c2, d1, d2] = build_chis(specs, axes)?;
    let candidates = |axis: Axis, chi: &DiscreteOperator, chi_p: &DiscreteOperator| -> Result<Vec<(String, WaveFunction1D, f64)>> {
        let mut out = Vec::new();
        for (label, phi) in witness_catalog(axis)? {
            let flipped = flip(&phi, chi)?;
            let r = r_functional(&phi, chi, chi_p)?;
            let rf = r_functional(&flipped, chi, chi_p)?;
            out.push((label.clone(), phi, r));
            out.push((format!("flip({label})"), flipped, rf));
        }
        Ok(out)
    };
    let first = candidates(axes[0], &c1, &d1)?;
    let second = candidates(axes[1], &c2, &d2)?;
    let mut best = f64::INFINITY;
    for (l1, p1, r1) in &first {
        for (l2, p2, r2) in &second {
            let predicted = -r1 * r2;
            best = best.min(predicted);
            if predicted < -1e-6 {
                let psi = WaveFunction2D::product(p1, p2);
                let value = p_one_minus_p(&psi, specs)?;
                return Ok(Witness {
                    psi,
                    factors: [p1.clone(), p2.clone()],
                    phi1: l1.clone(),
                    phi2: l2.clone(),
                    value,
                    r1: *r1,
                    r2: *r2,
                });
            }
        }
    }
    Err(Error::NoWitness { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{SetSpec, SignPattern};
    use crate::operator::{build_chi, build_p, specs_from_pattern, spectrum_bounds, Representation};
    use proptest::prelude::*;

    fn ops(a: Axis) -> (DiscreteOperator, DiscreteOperator) {
        let s = SetSpec::Above { threshold: 0.0 };
        (
            build_chi(&ProjectorSpec::new(1, Representation::Position, s.clone()).unwrap(), a).unwrap(),
            build_chi(&ProjectorSpec::new(1, Representation::Momentum, s).unwrap(), a).unwrap(),
        )
    }

    #[test]
    fn r_matches_commutator_matrix() {
        let a = Axis::symmetric(32, 10.0).unwrap();
        let (c, d) = ops(a);
        let phi = gaussian_1d(a, 0.7, 1.0, 0.0).unwrap();
        let x = column(&phi);
        let k = (c.matrix() * d.matrix() - d.matrix() * c.matrix()) * Complex64::new(0.0, 1.0);
        let direct = x.dotc(&(k * &x)) * a.step();
        assert!(direct.im.abs() < 1e-10);
        let r = r_functional(&phi, &c, &d).unwrap();
        assert!((r - direct.re).abs() < 1e-10);
        assert!(r.abs() > 1e-3);
    }

    #[test]
    fn r_vanishes_inside_the_set() {
        let a = Axis::symmetric(32, 10.0).unwrap();
        let (c, d) = ops(a);
        let mask: Vec<bool> = a.points().iter().map(|&q| q > 0.0).collect();
        let phi = gaussian_1d(a, 3.0, 1.0, 0.0).unwrap();
        let vals = phi
            .amplitudes()
            .values()
            .iter()
            .zip(&mask)
            .map(|(v, &m)| if m { *v } else { Complex64::default() })
            .collect();
        let inside = WaveFunction1D::normalized(ComplexField1D::from_values([a], vals).unwrap()).unwrap().0;
        assert!(r_functional(&inside, &c, &d).unwrap().abs() < 1e-14);
    }

    #[test]
    fn witness_for_half_lines() {
        let a = Axis::symmetric(32, 10.0).unwrap();
        let specs = specs_from_pattern(&SignPattern::theta());
        let w = negativity_witness(&specs, [a, a]).unwrap();
        assert!(w.value < 0.0);
        assert!((w.value + w.r1 * w.r2).abs() < 1e-10);
        // Independent dense evaluation.
        let p = build_p(&specs, [a, a]).unwrap();
        let x = DVector::from_column_slice(w.psi.amplitudes().values());
        let px = p.matrix() * &x;
        let dense = (x.dotc(&px).re - px.norm_squared()) * a.step() * a.step();
        assert!((dense - w.value).abs() < 1e-10);
        let sp = spectrum_bounds(&p).unwrap();
        assert!(sp.lambda_min < 0.0);

        // Flipping Φ1 alone flips the sign.
        let chis = build_chis(&specs, [a, a]).unwrap();
        let phi1 = witness_catalog(a).unwrap().into_iter().find(|(l, _)| w.phi1.contains(l.as_str())).unwrap().1;
        let phi1 = if w.phi1.starts_with("flip") { flip(&phi1, &chis[0]).unwrap() } else { phi1 };
        let phi2 = witness_catalog(a).unwrap().into_iter().find(|(l, _)| w.phi2.contains(l.as_str())).unwrap().1;
        let phi2 = if w.phi2.starts_with("flip") { flip(&phi2, &chis[1]).unwrap() } else { phi2 };
        let again = p_one_minus_p(&WaveFunction2D::product(&phi1, &phi2), &specs).unwrap();
        assert!((again - w.value).abs() < 1e-12);
        let flipped = WaveFunction2D::product(&flip(&phi1, &chis[0]).unwrap(), &phi2);
        let v = p_one_minus_p(&flipped, &specs).unwrap();
        assert!((v + w.value).abs() < 1e-10);
    }

    #[test]
    fn commuting_sets_have_no_witness() {
        let a = Axis::symmetric(16, 5.0).unwrap();
        let s = SetSpec::Above { threshold: 0.0 };
        let specs = [1, 2, 1, 2].map(|ax| ProjectorSpec::new(ax, Representation::Position, s.clone()).unwrap());
        assert!(matches!(negativity_witness(&specs, [a, a]), Err(Error::NoWitness { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn flip_negates_r(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
            let a = Axis::symmetric(16, 5.0).unwrap();
            let (c, d) = ops(a);
            let vals: Vec<_> = re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect();
            prop_assume!(vals.iter().any(|v| v.norm() > 1e-3));
            let phi = WaveFunction1D::normalized(ComplexField1D::from_values([a], vals).unwrap()).unwrap().0;
            let r = r_functional(&phi, &c, &d).unwrap();
            let rf = r_functional(&flip(&phi, &c).unwrap(), &c, &d).unwrap();
            prop_assert!((r + rf).abs() < 1e-12);
        }
    }
}
