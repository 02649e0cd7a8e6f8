use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{specs_from_pattern, ProjectorSpec, Representation, Spectrum, SpectrumMethod};
use crate::bell::SignPattern;
use crate::error::{Error, Result};
use crate::grid::{to_momentum, to_position, Axis, ComplexField2D};
use crate::state::WaveFunction2D;

pub(super) fn check_order(specs: &[ProjectorSpec; 4]) -> Result<()> {
    for (spec, expected) in specs.iter().zip([1, 2, 1, 2]) {
        if spec.axis != expected {
            return Err(Error::AxisMismatch(format!(
                "projector on axis {} where axis {expected} is required",
                spec.axis
            )));
        }
    }
    Ok(())
}

struct Projector {
    k: usize,
    axis: Axis,
    representation: Representation,
    mask: Vec<bool>,
}

impl Projector {
    fn new(spec: &ProjectorSpec, axes: &[Axis; 2]) -> Result<Self> {
        let k = spec.axis - 1;
        Ok(Projector {
            k,
            axis: axes[k],
            representation: spec.representation,
            mask: spec.mask(&axes[k])?,
        })
    }

    fn mask_in_place(&self, f: &mut ComplexField2D) {
        let stride = f.stride(self.k);
        let n = self.mask.len();
        for (idx, v) in f.values_mut().iter_mut().enumerate() {
            if !self.mask[(idx / stride) % n] {
                *v = Complex64::default();
            }
        }
    }

    fn apply(&self, f: &ComplexField2D) -> ComplexField2D {
        match self.representation {
            Representation::Position => {
                let mut g = f.clone();
                self.mask_in_place(&mut g);
                g
            }
            Representation::Momentum => {
                let mut g = to_momentum(f, self.k).expect("axis exists");
                self.mask_in_place(&mut g);
                to_position(&g, self.k, self.axis).expect("dual axis matches")
            }
        }
    }
}

fn combine(a: &ComplexField2D, terms: &[(f64, &ComplexField2D)]) -> ComplexField2D {
    let mut out = a.clone();
    for (c, t) in terms {
        for (o, v) in out.values_mut().iter_mut().zip(t.values()) {
            *o += v * c;
        }
    }
    out
}

/// `P̂ψ` from masks and transforms, without forming any matrix.
pub fn apply_p(psi: &ComplexField2D, specs: &[ProjectorSpec; 4]) -> Result<ComplexField2D> {
    check_order(specs)?;
    let axes = *psi.axes();
    let [c1, c2, d1, d2] = [0, 1, 2, 3].map(|k| Projector::new(&specs[k], &axes));
    let (c1, c2, d1, d2) = (c1?, c2?, d1?, d2?);
    // P = χ1(1 - χ2 - χ'2) + χ2 + χ'1(χ'2 - χ2)
    let x2 = c2.apply(psi);
    let y2 = d2.apply(psi);
    let left = c1.apply(&combine(psi, &[(-1.0, &x2), (-1.0, &y2)]));
    let right = d1.apply(&combine(&y2, &[(-1.0, &x2)]));
    Ok(combine(&left, &[(1.0, &x2), (1.0, &right)]))
}

pub fn expectation_p_specs(psi: &WaveFunction2D, specs: &[ProjectorSpec; 4]) -> Result<f64> {
    let pp = apply_p(psi.amplitudes(), specs)?;
    Ok(psi.amplitudes().inner(&pp).re)
}

/// `⟨ψ|P̂|ψ⟩` for the projectors of a sign pattern.
pub fn expectation_p(psi: &WaveFunction2D, pattern: &SignPattern) -> Result<f64> {
    expectation_p_specs(psi, &specs_from_pattern(pattern))
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

const CHECK_EVERY: usize = 10;

/// Extreme eigenvalues of `P̂` by Lanczos with full reorthogonalisation,
/// for grids too large for the dense eigensolver. The residual of both Ritz
/// pairs must fall below `tol` within `max_steps`.
pub fn lanczos_extremes(
    specs: &[ProjectorSpec; 4],
    axes: [Axis; 2],
    max_steps: usize,
    tol: f64,
    seed: u64,
) -> Result<Spectrum> {
    check_order(specs)?;
    let dim = axes[0].len() * axes[1].len();
    let apply = |v: &[Complex64]| -> Result<Vec<Complex64>> {
        let f = ComplexField2D::from_values(axes, v.to_vec())?;
        Ok(apply_p(&f, specs)?.into_values())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let n0 = norm(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut basis: Vec<Vec<Complex64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = (f64::NAN, f64::NAN, f64::INFINITY);
    let steps = max_steps.min(dim);
    for j in 0..steps {
        let mut w = apply(&basis[j])?;
        alpha.push(dotc(&basis[j], &w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = dotc(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnorm = norm(&w);

        let m = alpha.len();
        // The Ritz problem is O(m³); only solve it periodically.
        if m % CHECK_EVERY != 0 && m != steps && bnorm >= 1e-13 {
            beta.push(bnorm);
            w.iter_mut().for_each(|x| *x /= bnorm);
            basis.push(w);
            continue;
        }
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (imin, lmin) = eig.eigenvalues.argmin();
        let (imax, lmax) = eig.eigenvalues.argmax();
        // Standard Lanczos residual bound: β_m |last component of the Ritz vector|.
        let rmin = bnorm * eig.eigenvectors[(m - 1, imin)].abs();
        let rmax = bnorm * eig.eigenvectors[(m - 1, imax)].abs();
        last = (lmin, lmax, rmin.max(rmax));
        if last.2 <= tol || bnorm < 1e-13 {
            return Ok(Spectrum {
                lambda_min: lmin,
                lambda_max: lmax,
                residual: last.2,
                method: SpectrumMethod::Lanczos { steps: m },
            });
        }
        beta.push(bnorm);
        w.iter_mut().for_each(|x| *x /= bnorm);
        basis.push(w);
    }
    Err(Error::Eigen(format!(
        "Lanczos did not converge in {steps} steps: λ ∈ [{}, {}], residual {:.3e}",
        last.0, last.1, last.2
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{quantum_bell_s, SetSpec};
    use crate::operator::{build_p, spectrum_bounds};
    use crate::state::{psi_l, random_state, Sign};
    use nalgebra::DVector;

    #[test]
    fn matches_dense_operator() {
        let a = Axis::symmetric(16, 6.0).unwrap();
        let b = Axis::new(8, -3.0, 5.0).unwrap();
        let pattern: SignPattern = "q1>0.1;q2 in (-1,1)|(2,4);p1<0.3;p2 notin (-1.1,0.5)".parse().unwrap();
        let specs = specs_from_pattern(&pattern);
        let p = build_p(&specs, [a, b]).unwrap();
        let psi = random_state([a, b], 9).unwrap();
        let dense = p.matrix() * DVector::from_column_slice(psi.amplitudes().values());
        let free = apply_p(psi.amplitudes(), &specs).unwrap();
        let diff = free
            .values()
            .iter()
            .zip(dense.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn bridge_to_marginal_route() {
        let a = Axis::symmetric(32, 8.0).unwrap();
        for seed in 0..5 {
            let psi = random_state([a, a], seed).unwrap();
            for pattern in ["theta", "q1<0.2;q2>-0.7;p1 in (-1,2);p2>0.4"] {
                let rep = quantum_bell_s(&psi, &pattern.parse().unwrap()).unwrap();
                assert!((rep.s - rep.operator_check.unwrap()).abs() < 1e-10);
            }
        }
        let psi = psi_l(3.0, Sign::Plus, [a, a], false).unwrap().state;
        let rep = quantum_bell_s(&psi, &SignPattern::theta()).unwrap();
        assert!((rep.s - rep.operator_check.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let a = Axis::symmetric(16, 8.0).unwrap();
        let specs = specs_from_pattern(&SignPattern::theta());
        let dense = spectrum_bounds(&build_p(&specs, [a, a]).unwrap()).unwrap();
        let lz = lanczos_extremes(&specs, [a, a], 256, 1e-9, 1).unwrap();
        assert!((dense.lambda_min - lz.lambda_min).abs() < 1e-8);
        assert!((dense.lambda_max - lz.lambda_max).abs() < 1e-8);
    }

    #[test]
    fn rejects_misordered_specs() {
        let a = Axis::symmetric(8, 4.0).unwrap();
        let mut specs = specs_from_pattern(&SignPattern::theta());
        specs[2] = ProjectorSpec::new(2, Representation::Momentum, SetSpec::Above { threshold: 0.0 }).unwrap();
        let psi = random_state([a, a], 0).unwrap();
        assert!(apply_p(psi.amplitudes(), &specs).is_err());
    }
}
