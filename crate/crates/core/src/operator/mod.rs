//! Projectors `χ̂` on the grid basis and the operator
//! `P̂ = χ̂1 + χ̂2 + χ̂'1χ̂'2 - χ̂1χ̂2 - χ̂1χ̂'2 - χ̂'1χ̂2`.
//!
//! Dense matrices are used up to a few thousand basis states; the
//! matrix-free routines in [`apply_p`] and [`lanczos_extremes`] cover larger
//! grids.

mod matfree;
mod witness;

pub use matfree::{apply_p, expectation_p, expectation_p_specs, lanczos_extremes};
pub use witness::{
    flip, negativity_witness, p_one_minus_p, r_functional, witness_catalog, Witness, WitnessReport,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::{SetSpec, SignPattern};
use crate::error::{Error, Result};
use crate::grid::{transform_matrix, Axis};

/// Largest dense tensor dimension `n1·n2` accepted by [`build_p`].
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Position,
    Momentum,
}

/// The set a projector selects. `Full` and `Empty` exist for degenerate
/// checks only; a `Proper` set must cut the working axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorSet {
    Proper(SetSpec),
    Full,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorSpec {
    /// 1 or 2.
    pub axis: usize,
    pub representation: Representation,
    pub set: ProjectorSet,
}

impl ProjectorSpec {
    pub fn new(axis: usize, representation: Representation, set: SetSpec) -> Result<Self> {
        if axis != 1 && axis != 2 {
            return Err(Error::AxisMismatch(format!("projector axis {axis} is not 1 or 2")));
        }
        set.validate()?;
        Ok(ProjectorSpec {
            axis,
            representation,
            set: ProjectorSet::Proper(set),
        })
    }

    /// Mask on the grid of the chosen representation.
    pub fn mask(&self, position: &Axis) -> Result<Vec<bool>> {
        let grid = match self.representation {
            Representation::Position => *position,
            Representation::Momentum => position.dual(),
        };
        match &self.set {
            ProjectorSet::Proper(s) => s.indicator(&grid),
            ProjectorSet::Full => Ok(vec![true; grid.len()]),
            ProjectorSet::Empty => Ok(vec![false; grid.len()]),
        }
    }
}

/// `χ1, χ2, χ'1, χ'2` for a sign pattern: sets of `q1, q2` in position,
/// sets of `p1, p2` in momentum.
pub fn specs_from_pattern(pattern: &SignPattern) -> [ProjectorSpec; 4] {
    let mk = |k: usize, axis, representation| ProjectorSpec {
        axis,
        representation,
        set: ProjectorSet::Proper(pattern.set(k).clone()),
    };
    [
        mk(0, 1, Representation::Position),
        mk(1, 2, Representation::Position),
        mk(2, 1, Representation::Momentum),
        mk(3, 2, Representation::Momentum),
    ]
}

/// A dense operator on a 1D factor or on the `n1·n2` tensor basis
/// (index `i1·n2 + i2`).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    matrix: DMatrix<Complex64>,
    axes: Vec<Axis>,
}

pub fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl DiscreteOperator {
    pub fn new(matrix: DMatrix<Complex64>, axes: Vec<Axis>) -> Result<Self> {
        let dim: usize = axes.iter().map(Axis::len).product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                actual: matrix.nrows(),
            });
        }
        Ok(DiscreteOperator { matrix, axes })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        max_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn idempotency_residual(&self) -> f64 {
        max_norm(&(&self.matrix * &self.matrix - &self.matrix))
    }

    pub fn commutator(&self, other: &DiscreteOperator) -> Result<DMatrix<Complex64>> {
        if self.axes != other.axes {
            return Err(Error::AxisMismatch("commutator of operators on different axes".into()));
        }
        Ok(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    /// `⟨v|A|v⟩` for grid amplitudes normalised with the cell volume.
    pub fn expectation(&self, v: &[Complex64]) -> Result<Complex64> {
        if v.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        let x = DVector::from_column_slice(v);
        let cell: f64 = self.axes.iter().map(Axis::step).product();
        Ok(x.dotc(&(&self.matrix * &x)) * cell)
    }
}

/// `χ̂` on one axis: a diagonal mask in position, `U†·mask·U` in momentum.
pub fn build_chi(spec: &ProjectorSpec, position: Axis) -> Result<DiscreteOperator> {
    let mask = spec.mask(&position)?;
    let n = position.len();
    let matrix = match spec.representation {
        Representation::Position => DMatrix::from_fn(n, n, |i, j| {
            if i == j && mask[i] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        }),
        Representation::Momentum => {
            // Rescaled so that U is unitary for the plain coefficient inner product.
            let scale = (position.dual().step() / position.step()).sqrt();
            let u = DMatrix::from_row_slice(n, n, &transform_matrix(&position)) * Complex64::new(scale, 0.0);
            let mut mu = u.clone();
            for (k, &m) in mask.iter().enumerate() {
                if !m {
                    mu.row_mut(k).fill(Complex64::default());
                }
            }
            u.adjoint() * mu
        }
    };
    DiscreteOperator::new(matrix, vec![position])
}

/// The four factors `[χ1, χ2, χ'1, χ'2]`.
pub fn build_chis(specs: &[ProjectorSpec; 4], axes: [Axis; 2]) -> Result<[DiscreteOperator; 4]> {
    matfree::check_order(specs)?;
    let b = |k: usize| build_chi(&specs[k], axes[specs[k].axis - 1]);
    Ok([b(0)?, b(1)?, b(2)?, b(3)?])
}

/// Dense `P̂` on the `n1·n2` tensor basis.
pub fn build_p(specs: &[ProjectorSpec; 4], axes: [Axis; 2]) -> Result<DiscreteOperator> {
    let dim = axes[0].len() * axes[1].len();
    if dim > DENSE_LIMIT {
        return Err(Error::GridTooLarge(format!(
            "dense P has dimension {dim} > {DENSE_LIMIT}; use the matrix-free routines"
        )));
    }
    let [c1, c2, d1, d2] = build_chis(specs, axes)?;
    Ok(assemble_p(&c1, &c2, &d1, &d2, axes))
}

fn assemble_p(
    c1: &DiscreteOperator,
    c2: &DiscreteOperator,
    d1: &DiscreteOperator,
    d2: &DiscreteOperator,
    axes: [Axis; 2],
) -> DiscreteOperator {
    let (n1, n2) = (axes[0].len(), axes[1].len());
    let (a, b, c, d) = (c1.matrix(), c2.matrix(), d1.matrix(), d2.matrix());
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::default();
    let matrix = DMatrix::from_fn(n1 * n2, n1 * n2, |r, s| {
        let (i1, i2) = (r / n2, r % n2);
        let (j1, j2) = (s / n2, s % n2);
        let e1 = if i1 == j1 { one } else { zero };
        let e2 = if i2 == j2 { one } else { zero };
        let (a, b, c, d) = (a[(i1, j1)], b[(i2, j2)], c[(i1, j1)], d[(i2, j2)]);
        a * e2 + e1 * b + c * d - a * b - a * d - c * b
    });
    DiscreteOperator {
        matrix,
        axes: axes.to_vec(),
    }
}

/// `‖P̂² - P̂ + [χ1,χ'1] ⊗ [χ2,χ'2]‖` in the max norm.
pub fn check_p2_identity(p: &DiscreteOperator, chis: &[DiscreteOperator; 4]) -> Result<f64> {
    let k1 = chis[0].commutator(&chis[2])?;
    let k2 = chis[1].commutator(&chis[3])?;
    let lhs = p.matrix() * p.matrix() - p.matrix() + k1.kronecker(&k2);
    Ok(max_norm(&lhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `max ‖P̂v - λv‖` over the two extremal pairs.
    pub residual: f64,
    pub method: SpectrumMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    Dense,
    Lanczos { steps: usize },
}

/// Extreme eigenvalues of a Hermitian operator by full decomposition.
pub fn spectrum_bounds(op: &DiscreteOperator) -> Result<Spectrum> {
    if op.hermiticity_residual() > 1e-10 {
        return Err(Error::Eigen("operator is not Hermitian".into()));
    }
    let eig = op.matrix().clone().symmetric_eigen();
    let vals = &eig.eigenvalues;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let (imin, lambda_min) = vals.argmin();
    let (imax, lambda_max) = vals.argmax();
    let res = |i: usize, l: f64| {
        let v = eig.eigenvectors.column(i);
        (op.matrix() * v - v * Complex64::new(l, 0.0)).norm()
    };
    let residual = res(imin, lambda_min).max(res(imax, lambda_max));
    if residual > 1e-8 {
        return Err(Error::Eigen(format!("eigenpair residual {residual:.3e}")));
    }
    Ok(Spectrum {
        lambda_min,
        lambda_max,
        residual,
        method: SpectrumMethod::Dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half(axis: usize, repr: Representation) -> ProjectorSpec {
        ProjectorSpec::new(axis, repr, SetSpec::Above { threshold: 0.0 }).unwrap()
    }

    fn theta_specs() -> [ProjectorSpec; 4] {
        specs_from_pattern(&SignPattern::theta())
    }

    fn full(axis: usize, representation: Representation, set: ProjectorSet) -> ProjectorSpec {
        ProjectorSpec { axis, representation, set }
    }

    #[test]
    fn full_set_is_identity_and_improper_sets_rejected() {
        let a = Axis::symmetric(16, 5.0).unwrap();
        for repr in [Representation::Position, Representation::Momentum] {
            let id = build_chi(&full(1, repr, ProjectorSet::Full), a).unwrap();
            let diff = id.matrix() - DMatrix::<Complex64>::identity(16, 16);
            assert!(max_norm(&diff) < 1e-12);
            let bad = ProjectorSpec::new(1, repr, SetSpec::Below { threshold: 1e3 }).unwrap();
            assert!(build_chi(&bad, a).is_err());
        }
        assert!(ProjectorSpec::new(3, Representation::Position, SetSpec::Above { threshold: 0.0 }).is_err());
    }

    #[test]
    fn half_line_projectors() {
        let a = Axis::symmetric(32, 10.0).unwrap();
        let q = build_chi(&half(1, Representation::Position), a).unwrap();
        let tr: f64 = q.matrix().trace().re;
        assert_eq!(tr, 16.0);
        assert!(q.idempotency_residual() <= 1e-12);
        let p = build_chi(&half(1, Representation::Momentum), a).unwrap();
        assert!(p.idempotency_residual() <= 1e-12);
        assert!(p.hermiticity_residual() <= 1e-12);
        assert!((p.matrix().trace().re - 16.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_p_operators_vanish() {
        let a = Axis::symmetric(8, 4.0).unwrap();
        for set in [ProjectorSet::Full, ProjectorSet::Empty] {
            let specs = [
                full(1, Representation::Position, set.clone()),
                full(2, Representation::Position, set.clone()),
                full(1, Representation::Momentum, set.clone()),
                full(2, Representation::Momentum, set.clone()),
            ];
            let p = build_p(&specs, [a, a]).unwrap();
            assert!(max_norm(p.matrix()) < 1e-12);
        }
    }

    #[test]
    fn structured_assembly_matches_kronecker_products() {
        let a = Axis::symmetric(16, 6.0).unwrap();
        let specs = theta_specs();
        let p = build_p(&specs, [a, a]).unwrap();
        let [c1, c2, d1, d2] = build_chis(&specs, [a, a]).unwrap();
        let id = DMatrix::<Complex64>::identity(16, 16);
        let k = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| x.kronecker(y);
        let oracle = k(c1.matrix(), &id) + k(&id, c2.matrix()) + k(d1.matrix(), d2.matrix())
            - k(c1.matrix(), c2.matrix())
            - k(c1.matrix(), d2.matrix())
            - k(d1.matrix(), c2.matrix());
        assert!(max_norm(&(p.matrix() - oracle)) < 1e-12);
        assert!(p.hermiticity_residual() < 1e-10);
    }

    #[test]
    fn cross_axis_factors_commute_exactly() {
        let a = Axis::symmetric(8, 4.0).unwrap();
        let [c1, _, _, d2] = build_chis(&theta_specs(), [a, a]).unwrap();
        let id = DMatrix::<Complex64>::identity(8, 8);
        let x = c1.matrix().kronecker(&id);
        let y = id.kronecker(d2.matrix());
        assert_eq!(max_norm(&(&x * &y - &y * &x)), 0.0);
    }

    #[test]
    fn p_squared_identity() {
        let a = Axis::symmetric(16, 10.0).unwrap();
        let specs = theta_specs();
        let chis = build_chis(&specs, [a, a]).unwrap();
        let p = build_p(&specs, [a, a]).unwrap();
        assert!(check_p2_identity(&p, &chis).unwrap() <= 1e-10);

        let pos = [
            half(1, Representation::Position),
            half(2, Representation::Position),
            ProjectorSpec::new(1, Representation::Position, SetSpec::Below { threshold: 1.1 }).unwrap(),
            ProjectorSpec::new(2, Representation::Position, SetSpec::Above { threshold: -2.1 }).unwrap(),
        ];
        let chis = build_chis(&pos, [a, a]).unwrap();
        let p = build_p(&pos, [a, a]).unwrap();
        assert!(p.idempotency_residual() <= 1e-12);
        assert!(check_p2_identity(&p, &chis).unwrap() <= 1e-12);
        let sp = spectrum_bounds(&p).unwrap();
        assert!(sp.lambda_min.abs() < 1e-10 && (sp.lambda_max - 1.0).abs() < 1e-10);
    }

    #[test]
    fn axis_order_is_enforced() {
        let a = Axis::symmetric(8, 4.0).unwrap();
        let mut specs = theta_specs();
        specs.swap(0, 1);
        assert!(matches!(build_p(&specs, [a, a]), Err(Error::AxisMismatch(_))));
    }

    #[test]
    fn dense_limit() {
        let a = Axis::symmetric(128, 4.0).unwrap();
        assert!(matches!(build_p(&theta_specs(), [a, a]), Err(Error::GridTooLarge(_))));
    }
}
