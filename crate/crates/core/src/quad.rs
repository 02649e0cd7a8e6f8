//! One-dimensional adaptive quadrature.
//!
//! Globally adaptive Gauss–Kronrod (7/15 points): the interval with the
//! largest error estimate is bisected until the summed estimate falls below
//! `max(abs_tol, rel_tol·|I|)` or the subdivision budget runs out. Endpoint
//! singularities of logarithmic or inverse-square-root type are handled by
//! bisection alone; the rule never evaluates the endpoints.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and absolute error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-12,
            rel: 1e-12,
            max_intervals: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Single Gauss–Kronrod 7/15 panel on `[a, b]`.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` with optional interior breakpoints.
///
/// Fails with [`Error::Quadrature`] when the budget is exhausted before the
/// tolerance is met; the error carries the best estimate reached.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let est = integrate_unchecked(&mut f, a, b, breakpoints, tol);
    if est.error <= tol.abs.max(tol.rel * est.value.abs()) && est.value.is_finite() {
        Ok(est)
    } else {
        Err(Error::Quadrature {
            value: est.value,
            error: est.error,
        })
    }
}

/// As [`integrate`] but always returns the estimate reached.
pub fn integrate_unchecked(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Estimate {
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        evaluations += 15;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let done = error <= tol.abs.max(tol.rel * value.abs());
        if done || heap.len() >= tol.max_intervals {
            return Estimate {
                value,
                error,
                evaluations,
            };
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            heap.push(worst);
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            return Estimate {
                value,
                error,
                evaluations,
            };
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(f, lo, hi);
            evaluations += 15;
            heap.push(Segment {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the accelerated limit and the change between the last two
/// diagonal estimates as an error indicator.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = partial_sums.last().copied().unwrap_or(0.0);
        let prev = if n == 2 { partial_sums[0] } else { last };
        return (last, (last - prev).abs());
    }
    // e[k] holds column k of the epsilon table for the current tail.
    let mut prev_col = vec![0.0; n + 1];
    let mut col: Vec<f64> = partial_sums.to_vec();
    let mut estimates = Vec::new();
    let mut k = 0;
    while col.len() > 1 {
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            let diff = col[i + 1] - col[i];
            let base = prev_col.get(i + 1).copied().unwrap_or(0.0);
            if diff == 0.0 {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / diff);
            }
        }
        prev_col = col;
        col = next;
        k += 1;
        if k % 2 == 0 {
            if let Some(&v) = col.last() {
                if v.is_finite() {
                    estimates.push(v);
                }
            }
        }
    }
    match estimates.len() {
        0 => {
            let last = partial_sums[n - 1];
            (last, (last - partial_sums[n - 2]).abs())
        }
        1 => (estimates[0], (estimates[0] - partial_sums[n - 1]).abs()),
        m => (estimates[m - 1], (estimates[m - 1] - estimates[m - 2]).abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &[], Tolerance::default())
            .unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((e.value - exact).abs() < 1e-13);
    }

    #[test]
    fn log_endpoint_singularity() {
        let e = integrate(|x: f64| x.ln(), 0.0, 1.0, &[], Tolerance::default()).unwrap();
        assert!((e.value + 1.0).abs() < 1e-11, "{e:?}");
    }

    #[test]
    fn inverse_sqrt_singularity() {
        let e = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 4.0, &[], Tolerance::default()).unwrap();
        assert!((e.value - 4.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let e = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], Tolerance::default())
            .unwrap();
        assert!((e.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 0.0,
            max_intervals: 4,
        };
        let r = integrate(|x: f64| (50.0 * x).sin() / x.sqrt(), 0.0, 10.0, &[], tol);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // Leibniz series for π/4.
        let mut s = 0.0;
        let sums: Vec<f64> = (0..15)
            .map(|k| {
                s += if k % 2 == 0 { 1.0 } else { -1.0 } / (2 * k + 1) as f64;
                s
            })
            .collect();
        let (v, err) = wynn_epsilon(&sums);
        assert!((v - PI / 4.0).abs() < 1e-10, "{v}");
        assert!(err < 1e-8);
        assert!((sums[14] - PI / 4.0).abs() > 1e-2);
    }
}
