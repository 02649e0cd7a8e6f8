use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One point mass of a two-variable atomic distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: (f64, f64),
    pub weight: f64,
}

/// Finite sum of weighted point masses in the plane.
///
/// Weights must be dyadic-exact for sums of signed weights to be exact; the
/// constructions in this crate only use halves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicDistribution2D {
    atoms: Vec<Atom>,
}

impl AtomicDistribution2D {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} has non-positive weight {}",
                    a.weight
                )));
            }
            if !(a.point.0.is_finite() && a.point.1.is_finite()) {
                return Err(Error::InvalidDistribution(format!("atom {i} is not finite")));
            }
            if atoms[..i].iter().any(|b| b.point == a.point) {
                return Err(Error::InvalidDistribution(format!(
                    "atom {i} coincides with an earlier atom at {:?}",
                    a.point
                )));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if total != 1.0 {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(AtomicDistribution2D { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Marginal weights on the first (`axis == 0`) or second coordinate,
    /// merged by exact coordinate equality and sorted.
    pub fn marginal(&self, axis: usize) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for a in &self.atoms {
            let x = if axis == 0 { a.point.0 } else { a.point.1 };
            match out.iter_mut().find(|(y, _)| *y == x) {
                Some(entry) => entry.1 += a.weight,
                None => out.push((x, a.weight)),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// `Σ w f(x, y)` over the atoms.
    pub fn expectation(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight * f(a.point.0, a.point.1))
            .sum()
    }
}
