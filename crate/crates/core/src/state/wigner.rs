//! Wigner function of a two-mode pure state on the product grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::WaveFunction2D;
use crate::error::{Error, Result};
use crate::grid::{to_momentum, to_position, Axis, ComplexField2D, Field, RealField4D};

/// `ψ` on the doubled grid `x0 + i·h/2`, `i < 2n`, per axis. The half-step
/// values come from the trigonometric interpolant (a Fourier shift).
struct Doubled {
    n: [usize; 2],
    values: Vec<Complex64>,
}

impl Doubled {
    fn new(psi: &WaveFunction2D) -> Doubled {
        let a = psi.amplitudes();
        let [n0, n1] = a.shape();
        let s0 = half_shift(a, 0);
        let s1 = half_shift(a, 1);
        let s01 = half_shift(&s0, 1);
        let mut values = vec![Complex64::default(); 4 * n0 * n1];
        for i in 0..n0 {
            for j in 0..n1 {
                let at = |di: usize, dj: usize| (2 * i + di) * 2 * n1 + 2 * j + dj;
                values[at(0, 0)] = a.get([i, j]);
                values[at(1, 0)] = s0.get([i, j]);
                values[at(0, 1)] = s1.get([i, j]);
                values[at(1, 1)] = s01.get([i, j]);
            }
        }
        Doubled { n: [n0, n1], values }
    }

    #[inline]
    fn get(&self, i: isize, j: isize) -> Option<Complex64> {
        let (w0, w1) = (2 * self.n[0] as isize, 2 * self.n[1] as isize);
        ((0..w0).contains(&i) && (0..w1).contains(&j))
            .then(|| self.values[(i * w1 + j) as usize])
    }
}

fn half_shift(f: &ComplexField2D, k: usize) -> ComplexField2D {
    let axis = *f.axis(k);
    let h = axis.step();
    let mut m = to_momentum(f, k).expect("axis exists");
    let dual = axis.dual();
    let stride = m.stride(k);
    let n = axis.len();
    for (idx, v) in m.values_mut().iter_mut().enumerate() {
        let p = dual.point((idx / stride) % n);
        *v *= Complex64::from_polar(1.0, 0.5 * p * h);
    }
    to_position(&m, k, axis).expect("dual axis matches")
}

/// `W(q1,q2,p1,p2) = (2π)^-2 ∫ d²y ψ*(q + y/2) ψ(q - y/2) e^{i p·y}` on the
/// grid `(q1, q2, p1, p2)`, with momenta on the dual axes.
///
/// The integral over `y` runs over lattice steps `y = m h`, with the
/// half-integer arguments taken from the Fourier interpolant and zero outside
/// the box. Summing `W` over `q` reproduces the discrete momentum densities
/// exactly; the `q` marginals are spectrally accurate for resolved states.
pub fn wigner(psi: &WaveFunction2D) -> RealField4D {
    let d = Doubled::new(psi);
    let axes = psi.axes();
    let [n0, n1] = d.n;
    let mut planner = FftPlanner::new();
    let f0 = planner.plan_fft_inverse(n0);
    let f1 = planner.plan_fft_inverse(n1);
    let phase = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|r| {
                let s = if r % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::from_polar(s, PI * r as f64 / n as f64)
            })
            .collect()
    };
    let (ph0, ph1) = (phase(n0), phase(n1));
    let scale = axes[0].step() * axes[1].step() / (4.0 * PI * PI);

    let mut out = vec![0.0; n0 * n1 * n0 * n1];
    let mut buf = vec![Complex64::default(); n0 * n1];
    let mut col = vec![Complex64::default(); n0];
    for j0 in 0..n0 {
        for j1 in 0..n1 {
            buf.iter_mut().for_each(|v| *v = Complex64::default());
            let (c0, c1) = (2 * j0 as isize, 2 * j1 as isize);
            for m0 in -(n0 as isize) + 1..n0 as isize {
                let (r0, s0) = fold(m0, n0);
                for m1 in -(n1 as isize) + 1..n1 as isize {
                    let (Some(lo), Some(hi)) = (d.get(c0 - m0, c1 - m1), d.get(c0 + m0, c1 + m1))
                    else {
                        continue;
                    };
                    let (r1, s1) = fold(m1, n1);
                    buf[r0 * n1 + r1] += lo * hi.conj() * (s0 * s1);
                }
            }
            for r0 in 0..n0 {
                for r1 in 0..n1 {
                    buf[r0 * n1 + r1] *= ph0[r0] * ph1[r1];
                }
            }
            for row in buf.chunks_mut(n1) {
                f1.process(row);
            }
            for k1 in 0..n1 {
                for r0 in 0..n0 {
                    col[r0] = buf[r0 * n1 + k1];
                }
                f0.process(&mut col);
                for k0 in 0..n0 {
                    buf[k0 * n1 + k1] = col[k0];
                }
            }
            let base = (j0 * n1 + j1) * n0 * n1;
            for (o, v) in out[base..base + n0 * n1].iter_mut().zip(&buf) {
                *o = v.re * scale;
            }
        }
    }
    Field::from_values([axes[0], axes[1], axes[0].dual(), axes[1].dual()], out)
        .expect("shape follows from the state")
}

/// `m mod n` and the sign picked up by `e^{i p m h}` on the dual grid.
#[inline]
fn fold(m: isize, n: usize) -> (usize, f64) {
    if m >= 0 {
        (m as usize, 1.0)
    } else {
        ((m + n as isize) as usize, -1.0)
    }
}

fn doubled_index(axis: &Axis, q: f64) -> Result<isize> {
    let t = (q - axis.point(0)) / (0.5 * axis.step());
    let i = t.round();
    if (t - i).abs() > 1e-9 || i < 0.0 || i >= 2.0 * axis.len() as f64 {
        return Err(Error::InvalidAxis(format!(
            "q = {q} is not on the half-step grid of [{}, {}]",
            axis.min(),
            axis.max()
        )));
    }
    Ok(i as isize)
}

/// Pointwise Wigner value by direct summation, for `q` on the half-step grid
/// (which includes the origin of a symmetric box) and arbitrary `p`.
pub fn wigner_at(psi: &WaveFunction2D, q: [f64; 2], p: [f64; 2]) -> Result<f64> {
    let axes = psi.axes();
    let c0 = doubled_index(&axes[0], q[0])?;
    let c1 = doubled_index(&axes[1], q[1])?;
    let d = Doubled::new(psi);
    let (h0, h1) = (axes[0].step(), axes[1].step());
    let mut sum = Complex64::default();
    for m0 in -(d.n[0] as isize) + 1..d.n[0] as isize {
        for m1 in -(d.n[1] as isize) + 1..d.n[1] as isize {
            if let (Some(lo), Some(hi)) = (d.get(c0 - m0, c1 - m1), d.get(c0 + m0, c1 + m1)) {
                let ph = p[0] * m0 as f64 * h0 + p[1] * m1 as f64 * h1;
                sum += lo * hi.conj() * Complex64::from_polar(1.0, ph);
            }
        }
    }
    Ok(sum.re * h0 * h1 / (4.0 * PI * PI))
}
