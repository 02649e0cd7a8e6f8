//! `S` for `Ψ± = (a⊗a ± e^{iπ/4} b⊗b)/√2` with the θ pattern, from
//! one-dimensional overlaps only.
//!
//! By parity every overlap of `a`, `b` with `θ(q)` or `θ(p)` is fixed
//! except `⟨a|θ(p)|b⟩ = iβ/2`, where `β = Im⟨a|sgn(p)|b⟩`. Two routes give
//! `β`:
//!
//! * position: `sgn(p)` acts as `i` times the Hilbert transform, so
//!   `β = -(1/π) ∫∫ h(u) h(v) / (u + v) du dv` over `[0, L]²`. With
//!   `u + 1 = s²` the inner integral is elementary and the outer one is a
//!   smooth 1D integral with a log endpoint singularity.
//! * momentum: `β = -(2/π) ∫₀^∞ A(p) B(p) dp` with the cosine and sine
//!   transforms `A`, `B` of `h` on `[0, L]`, integrated between zeros of
//!   the kernel and accelerated with Wynn's epsilon algorithm.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gk15, integrate, wynn_epsilon, Estimate, Tolerance};
use crate::state::{RegularizedSqrtState, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LargeLRoute {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeL {
    #[serde(rename = "L")]
    pub cutoff: f64,
    pub sign: Sign,
    #[serde(rename = "S")]
    pub s: f64,
    pub beta: f64,
    /// Propagated from the quadrature estimate on `β`.
    pub error_estimate: f64,
    pub p_expectation: f64,
    pub route: LargeLRoute,
}

fn check_cutoff(l: f64) -> Result<()> {
    if !(l > 1.0 && l.is_finite()) {
        return Err(Error::InvalidState(format!("cutoff L = {l} must exceed 1")));
    }
    Ok(())
}

/// `∫₁^M dt / (t² + s² - 2)`.
fn inner(s: f64, m: f64) -> f64 {
    let c = s * s - 2.0;
    if c.abs() < 1e-10 {
        return (1.0 - 1.0 / m) - c * (1.0 - 1.0 / (m * m * m)) / 3.0;
    }
    if c > 0.0 {
        let a = c.sqrt();
        (a.atan() - (a / m).atan()) / a
    } else {
        let b = (-c).sqrt();
        (b.atanh() - (b / m).atanh()) / b
    }
}

/// `β` by the position-space route.
pub fn beta_position(l: f64) -> Result<Estimate> {
    check_cutoff(l)?;
    let m = (l + 1.0).sqrt();
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-13,
        max_intervals: 4000,
    };
    let est = integrate(
        |w| {
            let s = w.exp();
            inner(s, m) * s
        },
        0.0,
        m.ln(),
        &[0.5 * 2f64.ln()],
        tol,
    )?;
    let scale = -4.0 / (PI * (l + 1.0).ln());
    Ok(Estimate {
        value: scale * est.value,
        error: scale.abs() * est.error,
        evaluations: est.evaluations,
    })
}

/// Cosine and sine transforms of `h` on `[0, L]` at frequency `p`.
fn cos_sin_transforms(profile: &RegularizedSqrtState, p: f64) -> (f64, f64) {
    let l = profile.cutoff();
    let width = if p > 0.0 { (PI / p).min(1.0) } else { 1.0 };
    let panels = (l / width).ceil() as usize;
    let dx = l / panels as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for k in 0..panels {
        let (lo, hi) = (k as f64 * dx, (k + 1) as f64 * dx);
        a += gk15(&mut |q| (p * q).cos() * profile.h(q), lo, hi).0;
        b += gk15(&mut |q| (p * q).sin() * profile.h(q), lo, hi).0;
    }
    (a, b)
}

/// `β` by the momentum-space route. Practical for `L` up to about `10³`.
pub fn beta_momentum(l: f64) -> Result<Estimate> {
    check_cutoff(l)?;
    let profile = RegularizedSqrtState::new(l)?;
    let cell = PI / l;
    let p0 = 10.0;
    let head_cells = (p0 / cell).ceil() as usize;
    let tail_cells = 40;
    let h0 = profile.h(0.0);
    // Non-oscillating part of A·B for large p: -h(0) h'(0) / p³.
    let c3 = 0.5 * h0 * h0;
    let tol = Tolerance {
        abs: 1e-13,
        rel: 1e-11,
        max_intervals: 200,
    };
    let mut evaluations = 0;
    let mut cell_integral = |k: usize, subtract: bool| -> Result<f64> {
        let f = |p: f64| {
            let (a, b) = cos_sin_transforms(&profile, p);
            let tail = if subtract { c3 / (p * p * p) } else { 0.0 };
            a * b - tail
        };
        let est = integrate(f, k as f64 * cell, (k + 1) as f64 * cell, &[], tol)?;
        evaluations += est.evaluations;
        Ok(est.value)
    };
    let mut head = 0.0;
    for k in 0..head_cells {
        head += cell_integral(k, false)?;
    }
    let p_start = head_cells as f64 * cell;
    let mut partial = Vec::with_capacity(tail_cells);
    let mut acc = 0.0;
    for k in head_cells..head_cells + tail_cells {
        acc += cell_integral(k, true)?;
        partial.push(acc);
    }
    let (tail, tail_err) = wynn_epsilon(&partial);
    let total = head + tail + c3 / (2.0 * p_start * p_start);
    // The subtraction leaves O(p⁻⁴) smooth terms.
    let model_err = (c3.abs() + 1.0) / (p_start * p_start * p_start);
    Ok(Estimate {
        value: -2.0 / PI * total,
        error: 2.0 / PI * (tail_err + model_err),
        evaluations,
    })
}

/// `(⟨P̂⟩, S)` for `Ψ±` given `β`.
///
/// In the basis `(a⊗a, b⊗b)` with coefficients `(1, c)/√2`,
/// `c = ±e^{iπ/4}`, the one-body matrices are `θ(q) → [[½,½],[½,½]]`,
/// `θ(p) → [[½, iβ/2], [-iβ/2, ½]]` and `1 → I`; a two-body expectation is
/// `Σ_ij v̄_i v_j X_ij Y_ij`.
pub fn s_from_beta(beta: f64, sign: Sign) -> (f64, f64) {
    let c = Complex64::from_polar(sign.value(), FRAC_PI_4);
    let v = [Complex64::new(1.0, 0.0), c].map(|x| x / 2f64.sqrt());
    let half = Complex64::new(0.5, 0.0);
    let one = [[Complex64::new(1.0, 0.0), Complex64::default()], [Complex64::default(), Complex64::new(1.0, 0.0)]];
    let tq = [[half, half], [half, half]];
    let tp = [[half, Complex64::new(0.0, 0.5 * beta)], [Complex64::new(0.0, -0.5 * beta), half]];
    let pair = |x: &[[Complex64; 2]; 2], y: &[[Complex64; 2]; 2]| -> f64 {
        let mut s = Complex64::default();
        for i in 0..2 {
            for j in 0..2 {
                s += v[i].conj() * v[j] * x[i][j] * y[i][j];
            }
        }
        s.re
    };
    let p = pair(&tq, &one) + pair(&one, &tq) + pair(&tp, &tp)
        - pair(&tq, &tq)
        - pair(&tq, &tp)
        - pair(&tp, &tq);
    (p, 2.0 - 4.0 * p)
}

/// `S(Ψ±)` for the θ pattern at cutoff `L` via the position route.
pub fn large_l_s(l: f64, sign: Sign) -> Result<LargeL> {
    let beta = beta_position(l)?;
    Ok(assemble(l, sign, beta, LargeLRoute::Position))
}

pub(crate) fn assemble(l: f64, sign: Sign, beta: Estimate, route: LargeLRoute) -> LargeL {
    let (p, s) = s_from_beta(beta.value, sign);
    // |dS/dβ| = 2 (1 - β) / √2 for the θ pattern.
    let error_estimate = 2f64.sqrt() * (1.0 - beta.value).abs() * beta.error;
    LargeL {
        cutoff: l,
        sign,
        s,
        beta: beta.value,
        error_estimate,
        p_expectation: p,
        route,
    }
}

impl LargeL {
    pub fn momentum(l: f64, sign: Sign) -> Result<LargeL> {
        Ok(assemble(l, sign, beta_momentum(l)?, LargeLRoute::Momentum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent evaluations of the double integral with a general-purpose
    // adaptive quadrature package, frozen here.
    const ORACLE: [(f64, f64); 6] = [
        (10.0, 1.7809467348870411),
        (100.0, 2.0350285455702717),
        (1e4, 2.354487799577494),
        (1e6, 2.5032539250549095),
        (1e8, 2.582350211499671),
        (1e12, 2.663106684260495),
    ];

    #[test]
    fn position_route_matches_reference_values() {
        for (l, s) in ORACLE {
            let r = large_l_s(l, Sign::Plus).unwrap();
            assert!((r.s - s).abs() < 1e-9, "L={l}: {} vs {s}", r.s);
            assert!(r.error_estimate < 1e-9);
        }
        assert!((beta_position(10.0).unwrap().value + 0.5870220623360392).abs() < 1e-10);
        assert!((beta_position(100.0).unwrap().value + 0.6964565921242643).abs() < 1e-10);
    }

    #[test]
    fn minus_sign_negates() {
        for (l, _) in ORACLE {
            let p = large_l_s(l, Sign::Plus).unwrap();
            let m = large_l_s(l, Sign::Minus).unwrap();
            assert!((p.s + m.s).abs() < 1e-14);
        }
    }

    #[test]
    fn increasing_toward_two_root_two() {
        let target = 2.0 * 2f64.sqrt();
        let s: Vec<f64> = [1e2, 1e4, 1e6, 1e8]
            .iter()
            .map(|&l| large_l_s(l, Sign::Plus).unwrap().s)
            .collect();
        for w in s.windows(2) {
            assert!(w[1] > w[0] && w[1] < target);
        }
        assert!(s[0] > 2.0);
    }

    #[test]
    fn closed_form_in_beta() {
        for beta in [-0.9, -0.5, 0.0, 0.3] {
            let (_, s) = s_from_beta(beta, Sign::Plus);
            assert!((s - (1.0 - beta) * (1.0 - beta) / 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn momentum_route_agrees() {
        for l in [10.0, 100.0] {
            let pos = beta_position(l).unwrap();
            let mom = beta_momentum(l).unwrap();
            assert!((pos.value - mom.value).abs() < 1e-4, "L={l}: {} vs {}", pos.value, mom.value);
            assert!(mom.error < 1e-3);
        }
    }

    #[test]
    fn rejects_small_cutoff() {
        assert!(large_l_s(1.0, Sign::Plus).is_err());
        assert!(large_l_s(f64::NAN, Sign::Plus).is_err());
    }
}
