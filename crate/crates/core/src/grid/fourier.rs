//! Unitary discretisation of `Φ̃(p) = (2π)^{-1/2} ∫ dq e^{-ipq} Φ(q)` (ħ = 1).
//!
//! On a midpoint position grid `q_j = q_0 + j h` and its dual momentum grid
//! `p_k = (k - n/2 + 1/2) Δp`, the Riemann sum
//!
//! ```text
//! Φ̃_k = h / √(2π) · Σ_j e^{-i p_k q_j} Φ_j
//! ```
//!
//! is unitary with respect to the weights `h` and `Δp`. It factors into a
//! pre-phase `(-1)^j e^{-iπj/n}`, a length-`n` FFT and a post-phase
//! `e^{-i p_k q_0}`, so the values equal the continuum convention at the grid
//! points, phases included.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Axis, Field};
use crate::error::{Error, Result};

struct Plan {
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl Plan {
    fn forward(position: &Axis) -> Plan {
        let n = position.len();
        let momentum = position.dual();
        let q0 = position.point(0);
        let scale = position.step() / (2.0 * PI).sqrt();
        let pre = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::from_polar(sign, -PI * j as f64 / n as f64)
            })
            .collect();
        let post = (0..n)
            .map(|k| Complex64::from_polar(scale, -momentum.point(k) * q0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(n);
        Plan { fft, pre, post }
    }

    fn inverse(position: &Axis) -> Plan {
        let n = position.len();
        let momentum = position.dual();
        let q0 = position.point(0);
        let scale = momentum.step() / (2.0 * PI).sqrt();
        let pre = (0..n)
            .map(|k| Complex64::from_polar(1.0, momentum.point(k) * q0))
            .collect();
        let post = (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { scale } else { -scale };
                Complex64::from_polar(sign, PI * j as f64 / n as f64)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Plan { fft, pre, post }
    }

    fn apply(&self, line: &mut [Complex64], scratch: &mut [Complex64]) {
        for (v, w) in line.iter_mut().zip(&self.pre) {
            *v *= w;
        }
        self.fft.process_with_scratch(line, scratch);
        for (v, w) in line.iter_mut().zip(&self.post) {
            *v *= w;
        }
    }
}

fn transform_axis<const D: usize>(
    field: &Field<Complex64, D>,
    k: usize,
    plan: &Plan,
    new_axis: Axis,
) -> Field<Complex64, D> {
    let n = field.axis(k).len();
    let stride = field.stride(k);
    let outer = field.len() / (n * stride);
    let mut out = field.clone().with_axis(k, new_axis);
    let values = out.values_mut();
    let mut line = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); plan.fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * n * stride + i;
            for (j, v) in line.iter_mut().enumerate() {
                *v = values[base + j * stride];
            }
            plan.apply(&mut line, &mut scratch);
            for (j, v) in line.iter().enumerate() {
                values[base + j * stride] = *v;
            }
        }
    }
    out
}

/// Transforms axis `k` (a position axis) to its dual momentum axis.
pub fn to_momentum<const D: usize>(
    field: &Field<Complex64, D>,
    k: usize,
) -> Result<Field<Complex64, D>> {
    if k >= D {
        return Err(Error::AxisMismatch(format!("axis {k} out of range for rank {D}")));
    }
    let position = *field.axis(k);
    Ok(transform_axis(field, k, &Plan::forward(&position), position.dual()))
}

/// Inverse of [`to_momentum`]: axis `k` must be the dual of `position`.
pub fn to_position<const D: usize>(
    field: &Field<Complex64, D>,
    k: usize,
    position: Axis,
) -> Result<Field<Complex64, D>> {
    if k >= D {
        return Err(Error::AxisMismatch(format!("axis {k} out of range for rank {D}")));
    }
    if *field.axis(k) != position.dual() {
        return Err(Error::AxisMismatch(format!(
            "axis {k} is not the momentum grid dual to {position:?}"
        )));
    }
    Ok(transform_axis(field, k, &Plan::inverse(&position), position))
}

/// Dense matrix of the forward transform, `U[k][j] = h/√(2π) e^{-i p_k q_j}`,
/// row-major. Built entry by entry, independently of the FFT path.
pub fn transform_matrix(position: &Axis) -> Vec<Complex64> {
    let n = position.len();
    let momentum = position.dual();
    let scale = position.step() / (2.0 * PI).sqrt();
    let mut u = Vec::with_capacity(n * n);
    for k in 0..n {
        let p = momentum.point(k);
        for j in 0..n {
            u.push(Complex64::from_polar(scale, -p * position.point(j)));
        }
    }
    u
}
