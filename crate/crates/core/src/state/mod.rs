//! Pure states on the two-dimensional configuration grid and their four
//! mixed-representation probability densities.

mod catalog;
mod product;
mod wigner;

pub use catalog::{
    gaussian_1d, ho_eigenstate, psi_l, random_state, PsiL, RegularizedSqrtState, Sign, StateSpec,
};
pub use product::product_density;
pub use wigner::{wigner, wigner_at};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    to_momentum, Axis, AtomicDistribution2D, ComplexField1D, ComplexField2D, Field, RealField2D,
    VariablePair,
};

/// Tolerance on the unit norm of a constructed state.
pub const NORM_TOL: f64 = 1e-9;

/// A normalised one-dimensional wavefunction on a position axis.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction1D {
    amplitudes: ComplexField1D,
}

impl WaveFunction1D {
    pub fn new(amplitudes: ComplexField1D) -> Result<Self> {
        let norm = amplitudes.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(WaveFunction1D { amplitudes })
    }

    /// Renormalises; returns the state and the squared norm before scaling.
    pub fn normalized(mut amplitudes: ComplexField1D) -> Result<(Self, f64)> {
        let norm = amplitudes.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(format!("cannot normalise norm {norm}")));
        }
        amplitudes.scale(1.0 / norm.sqrt());
        Ok((WaveFunction1D { amplitudes }, norm))
    }

    pub fn axis(&self) -> Axis {
        *self.amplitudes.axis(0)
    }

    pub fn amplitudes(&self) -> &ComplexField1D {
        &self.amplitudes
    }

    pub fn momentum(&self) -> ComplexField1D {
        to_momentum(&self.amplitudes, 0).expect("rank-1 field has axis 0")
    }

    /// `|Φ⁺⟩ - |Φ⁻⟩` for the split by a position mask: flips the sign of the
    /// component outside the mask.
    pub fn flipped(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.amplitudes.len() {
            return Err(Error::ShapeMismatch {
                expected: self.amplitudes.len(),
                actual: mask.len(),
            });
        }
        let mut a = self.amplitudes.clone();
        for (v, &inside) in a.values_mut().iter_mut().zip(mask) {
            if !inside {
                *v = -*v;
            }
        }
        Ok(WaveFunction1D { amplitudes: a })
    }
}

/// A normalised wavefunction `ψ(q1, q2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction2D {
    amplitudes: ComplexField2D,
}

impl WaveFunction2D {
    pub fn new(amplitudes: ComplexField2D) -> Result<Self> {
        let norm = amplitudes.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(WaveFunction2D { amplitudes })
    }

    /// Renormalises; returns the state and the squared norm before scaling.
    pub fn normalized(mut amplitudes: ComplexField2D) -> Result<(Self, f64)> {
        let norm = amplitudes.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState(format!("cannot normalise norm {norm}")));
        }
        amplitudes.scale(1.0 / norm.sqrt());
        Ok((WaveFunction2D { amplitudes }, norm))
    }

    /// `Φ1(q1) Φ2(q2)`.
    pub fn product(phi1: &WaveFunction1D, phi2: &WaveFunction1D) -> Self {
        let a = phi1.amplitudes.values();
        let b = phi2.amplitudes.values();
        let values = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect();
        let amplitudes = Field::from_values([phi1.axis(), phi2.axis()], values)
            .expect("shape follows from the factors");
        WaveFunction2D { amplitudes }
    }

    pub fn axes(&self) -> [Axis; 2] {
        *self.amplitudes.axes()
    }

    pub fn amplitudes(&self) -> &ComplexField2D {
        &self.amplitudes
    }

    pub fn inner(&self, other: &WaveFunction2D) -> Complex64 {
        self.amplitudes.inner(&other.amplitudes)
    }

    /// The four amplitudes `⟨q1,q2|ψ⟩`, `⟨q1,p2|ψ⟩`, `⟨p1,q2|ψ⟩`, `⟨p1,p2|ψ⟩`.
    pub fn mixed_representations(&self) -> MixedRepresentations {
        let qq = self.amplitudes.clone();
        let qp = to_momentum(&qq, 1).expect("axis 1 exists");
        let pq = to_momentum(&qq, 0).expect("axis 0 exists");
        let pp = to_momentum(&qp, 0).expect("axis 0 exists");
        MixedRepresentations { qq, qp, pq, pp }
    }

    /// The four quantum probability densities `|⟨·|ψ⟩|²`.
    pub fn quantum_marginals(&self) -> MarginalQuartet {
        self.mixed_representations().marginals()
    }
}

/// Amplitudes of one state in the four complete commuting sets.
#[derive(Debug, Clone)]
pub struct MixedRepresentations {
    pub qq: ComplexField2D,
    pub qp: ComplexField2D,
    pub pq: ComplexField2D,
    pub pp: ComplexField2D,
}

impl MixedRepresentations {
    pub fn get(&self, pair: VariablePair) -> &ComplexField2D {
        match pair {
            VariablePair::QQ => &self.qq,
            VariablePair::QP => &self.qp,
            VariablePair::PQ => &self.pq,
            VariablePair::PP => &self.pp,
        }
    }

    pub fn marginals(&self) -> MarginalQuartet {
        MarginalQuartet {
            qq: Marginal::Grid(self.qq.abs_sqr()),
            qp: Marginal::Grid(self.qp.abs_sqr()),
            pq: Marginal::Grid(self.pq.abs_sqr()),
            pp: Marginal::Grid(self.pp.abs_sqr()),
            provenance: Provenance::Quantum,
        }
    }
}

/// A two-variable probability distribution, sampled or atomic.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Grid(RealField2D),
    Atomic(AtomicDistribution2D),
}

impl Marginal {
    pub fn as_grid(&self) -> Option<&RealField2D> {
        match self {
            Marginal::Grid(g) => Some(g),
            Marginal::Atomic(_) => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Marginal::Grid(g) => g.integrate(),
            Marginal::Atomic(a) => a.atoms().iter().map(|x| x.weight).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// `|⟨ξ|ψ⟩|²` of a pure state.
    Quantum,
    /// Built directly, e.g. the atomic counterexample.
    ClassicalConstructed,
    /// Projections of an explicit phase-space density.
    FromDensity,
}

/// The four densities `σ_qq(q1,q2)`, `σ_qp(q1,p2)`, `σ_pq(p1,q2)`, `σ_pp(p1,p2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalQuartet {
    pub qq: Marginal,
    pub qp: Marginal,
    pub pq: Marginal,
    pub pp: Marginal,
    pub provenance: Provenance,
}

impl MarginalQuartet {
    pub fn get(&self, pair: VariablePair) -> &Marginal {
        match pair {
            VariablePair::QQ => &self.qq,
            VariablePair::QP => &self.qp,
            VariablePair::PQ => &self.pq,
            VariablePair::PP => &self.pp,
        }
    }

    /// The four projections of a phase-space density.
    pub fn from_density(rho: &crate::grid::RealField4D) -> Self {
        MarginalQuartet {
            qq: Marginal::Grid(rho.marginalize(VariablePair::QQ)),
            qp: Marginal::Grid(rho.marginalize(VariablePair::QP)),
            pq: Marginal::Grid(rho.marginalize(VariablePair::PQ)),
            pp: Marginal::Grid(rho.marginalize(VariablePair::PP)),
            provenance: Provenance::FromDensity,
        }
    }
}
