//! Uniform midpoint grids, tensor-grid fields, quadrature and the unitary
//! position/momentum transform.
//!
//! Every axis is a midpoint grid: `n` cells of width `step` on `[min, max]`
//! with samples at the cell centres. A symmetric box with even `n` therefore
//! never samples the origin, and the momentum grid dual to it is again a
//! symmetric midpoint grid (see [`Axis::dual`]).

mod atomic;
mod field;
mod fourier;

pub use atomic::{Atom, AtomicDistribution2D};
pub use field::{
    ComplexField1D, ComplexField2D, Field, RealField1D, RealField2D, RealField4D, VariablePair,
};
pub use fourier::{to_momentum, to_position, transform_matrix};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform midpoint grid on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AxisRepr")]
pub struct Axis {
    n: usize,
    min: f64,
    max: f64,
}

#[derive(Deserialize)]
struct AxisRepr {
    n: usize,
    min: f64,
    max: f64,
}

impl TryFrom<AxisRepr> for Axis {
    type Error = Error;

    fn try_from(r: AxisRepr) -> Result<Self> {
        Axis::new(r.n, r.min, r.max)
    }
}

impl Axis {
    pub fn new(n: usize, min: f64, max: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidAxis(format!(
                "point count {n} must be a power of two >= 4"
            )));
        }
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidAxis(format!("bad endpoints [{min}, {max}]")));
        }
        Ok(Axis { n, min, max })
    }

    /// Symmetric box `[-half_width, half_width]`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Axis::new(n, -half_width, half_width)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.min + (j as f64 + 0.5) * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Momentum grid conjugate to this axis.
    ///
    /// The momenta are `p_k = (k - n/2 + 1/2) * 2π / (n * step)`, i.e. the
    /// midpoint grid on `[-π/step, π/step]`: symmetric about zero, with
    /// `step * dual.step() == 2π / n`.
    pub fn dual(&self) -> Axis {
        let half = PI / self.step();
        Axis {
            n: self.n,
            min: -half,
            max: half,
        }
    }

    /// Index of the grid point equal to `x`, if any sample lands exactly on it.
    pub fn exact_index(&self, x: f64) -> Option<usize> {
        let t = (x - self.min) / self.step() - 0.5;
        let j = t.round();
        if j < 0.0 || j >= self.n as f64 {
            return None;
        }
        let j = j as usize;
        (self.point(j) == x).then_some(j)
    }
}
