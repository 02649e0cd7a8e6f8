//! Built-in states: Gaussians, oscillator eigenfunctions, random packets,
//! and the regularised `1/√q` family `Ψ±`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{WaveFunction1D, WaveFunction2D};
use crate::error::{Error, Result};
use crate::grid::{Axis, ComplexField1D, ComplexField2D};

/// `(π w²)^{-1/4} exp(-(q-c)²/(2w²) + i k q)`, renormalised on the grid.
pub fn gaussian_1d(axis: Axis, center: f64, width: f64, momentum: f64) -> Result<WaveFunction1D> {
    if !(width > 0.0) {
        return Err(Error::InvalidState(format!("width {width} must be positive")));
    }
    let norm = (PI * width * width).powf(-0.25);
    let f = ComplexField1D::from_fn([axis], |[q]| {
        let d = (q - center) / width;
        Complex64::from_polar(norm * (-0.5 * d * d).exp(), momentum * q)
    });
    Ok(WaveFunction1D::normalized(f)?.0)
}

/// Harmonic-oscillator eigenfunction `φ_n` (ħ = m = ω = 1), via the
/// normalised Hermite recurrence.
pub fn ho_eigenstate(axis: Axis, n: usize) -> Result<WaveFunction1D> {
    if n > 150 {
        return Err(Error::InvalidState(format!("oscillator level {n} too high")));
    }
    let f = ComplexField1D::from_fn([axis], |[q]| Complex64::new(ho_value(n, q), 0.0));
    Ok(WaveFunction1D::normalized(f)?.0)
}

pub(crate) fn ho_value(n: usize, q: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * q * q).exp();
    for k in 0..n {
        let next = (2.0 / (k + 1) as f64).sqrt() * q * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// A smooth random state: three Gaussian wave packets with random centres,
/// widths, mean momenta and complex weights. Deterministic in `seed`.
pub fn random_state(axes: [Axis; 2], seed: u64) -> Result<WaveFunction2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let packets: Vec<_> = (0..3)
        .map(|_| {
            let c = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let w = [rng.random_range(0.6..1.4), rng.random_range(0.6..1.4)];
            let k = [rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2)];
            let amp = Complex64::from_polar(rng.random_range(0.3..1.0), rng.random_range(0.0..2.0 * PI));
            (c, w, k, amp)
        })
        .collect();
    let f = ComplexField2D::from_fn(axes, |x| {
        packets
            .iter()
            .map(|(c, w, k, amp)| {
                let d0 = (x[0] - c[0]) / w[0];
                let d1 = (x[1] - c[1]) / w[1];
                amp * Complex64::from_polar(
                    (-0.5 * (d0 * d0 + d1 * d1)).exp(),
                    k[0] * x[0] + k[1] * x[1],
                )
            })
            .sum()
    });
    Ok(WaveFunction2D::normalized(f)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("sign must be + or -, got '{other}'"))),
        }
    }
}

/// The profile `h_L(q) = θ(L - q) / √(ln(L+1)) · 1/√(q+1)` on `q ≥ 0`, with
/// `∫₀^∞ h_L² = 1`, and the even/odd pair built from it:
/// `a(q) = h_L(|q|)/√2`, `b(q) = sgn(q) h_L(|q|)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedSqrtState {
    cutoff: f64,
}

impl RegularizedSqrtState {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidState(format!("cutoff L = {cutoff} must be positive")));
        }
        Ok(RegularizedSqrtState { cutoff })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn h(&self, q: f64) -> f64 {
        if q < 0.0 || q > self.cutoff {
            0.0
        } else {
            1.0 / ((self.cutoff + 1.0).ln() * (q + 1.0)).sqrt()
        }
    }

    pub fn even(&self, q: f64) -> f64 {
        self.h(q.abs()) / 2f64.sqrt()
    }

    pub fn odd(&self, q: f64) -> f64 {
        sgn(q) * self.even(q)
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sampled `Ψ±` together with its discretisation bookkeeping.
#[derive(Debug, Clone)]
pub struct PsiL {
    pub state: WaveFunction2D,
    pub profile: RegularizedSqrtState,
    pub sign: Sign,
    /// `∫|Ψ|²` on the grid before renormalisation.
    pub raw_norm: f64,
    pub truncated: bool,
}

impl PsiL {
    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.raw_norm
    }
}

/// `Ψ±(q1,q2) = (1/(2√2)) [1 ± e^{iπ/4} sgn q1 sgn q2] h_L(|q1|) h_L(|q2|)`.
///
/// The sampled state is renormalised; the raw norm is kept in the result.
/// A box that does not contain `[-L, L]` is an error unless
/// `allow_truncation` is set.
pub fn psi_l(cutoff: f64, sign: Sign, axes: [Axis; 2], allow_truncation: bool) -> Result<PsiL> {
    let profile = RegularizedSqrtState::new(cutoff)?;
    let fits = axes
        .iter()
        .all(|a| a.min() <= -cutoff && a.max() >= cutoff);
    if !fits && !allow_truncation {
        return Err(Error::InvalidState(format!(
            "box {:?} does not contain [-{cutoff}, {cutoff}]",
            axes.map(|a| (a.min(), a.max()))
        )));
    }
    let phase = Complex64::from_polar(sign.value(), FRAC_PI_4);
    let f = ComplexField2D::from_fn(axes, |[q1, q2]| {
        let s = sgn(q1) * sgn(q2);
        (Complex64::new(1.0, 0.0) + phase * s)
            * (profile.h(q1.abs()) * profile.h(q2.abs()) / (2.0 * 2f64.sqrt()))
    });
    let (state, raw_norm) = WaveFunction2D::normalized(f)?;
    Ok(PsiL {
        state,
        profile,
        sign,
        raw_norm,
        truncated: !fits,
    })
}

/// Textual state selector used by the command line and state files.
///
/// ```text
/// gaussian            product ground state
/// ho:M,N              oscillator product φ_M(q1) φ_N(q2)
/// psi+:L | psi-:L     the regularised family at cutoff L
/// random:SEED         three random Gaussian packets
/// cat:D               (φ(q1-D) + φ(q1+D)) ⊗ φ(q2), renormalised
/// file:PATH           serialized complex rank-2 field
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    Gaussian,
    Oscillator(usize, usize),
    Psi { cutoff: f64, sign: Sign },
    Random(u64),
    Cat(f64),
    File(PathBuf),
}

impl StateSpec {
    pub fn build(&self, axes: [Axis; 2]) -> Result<WaveFunction2D> {
        match self {
            StateSpec::Gaussian => Ok(WaveFunction2D::product(
                &ho_eigenstate(axes[0], 0)?,
                &ho_eigenstate(axes[1], 0)?,
            )),
            StateSpec::Oscillator(m, n) => Ok(WaveFunction2D::product(
                &ho_eigenstate(axes[0], *m)?,
                &ho_eigenstate(axes[1], *n)?,
            )),
            StateSpec::Psi { cutoff, sign } => Ok(psi_l(*cutoff, *sign, axes, false)?.state),
            StateSpec::Random(seed) => random_state(axes, *seed),
            StateSpec::Cat(d) => {
                let left = gaussian_1d(axes[0], -d, 1.0, 0.0)?;
                let right = gaussian_1d(axes[0], *d, 1.0, 0.0)?;
                let sum = ComplexField1D::from_values(
                    [axes[0]],
                    left.amplitudes()
                        .values()
                        .iter()
                        .zip(right.amplitudes().values())
                        .map(|(a, b)| a + b)
                        .collect(),
                )?;
                let cat = WaveFunction1D::normalized(sum)?.0;
                Ok(WaveFunction2D::product(&cat, &ho_eigenstate(axes[1], 0)?))
            }
            StateSpec::File(path) => {
                let field = crate::io::decode_complex2(&std::fs::read(path)?)?;
                if *field.axes() != axes {
                    return Err(Error::AxisMismatch(format!(
                        "state file axes {:?} differ from requested grid",
                        field.axes()
                    )));
                }
                Ok(WaveFunction2D::normalized(field)?.0)
            }
        }
    }

    /// Box half-width that resolves the state at its natural scale.
    pub fn natural_half_width(&self) -> f64 {
        match self {
            StateSpec::Psi { cutoff, .. } => *cutoff * 1.25,
            StateSpec::Oscillator(m, n) => 6.0 + (2.0 * (*m.max(n)) as f64 + 1.0).sqrt(),
            StateSpec::Cat(d) => 6.0 + d.abs(),
            _ => 6.0,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not finite: '{s}'")));
    }
    Ok(v)
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| {
            arg.ok_or_else(|| Error::Parse(format!("'{head}' needs {what}")))
        };
        match head {
            "gaussian" if arg.is_none() => Ok(StateSpec::Gaussian),
            "ho" => {
                let (m, n) = need("two levels M,N")?
                    .split_once(',')
                    .ok_or_else(|| Error::Parse("expected ho:M,N".into()))?;
                let level = |x: &str| {
                    x.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&v| v <= 150)
                        .ok_or_else(|| Error::Parse(format!("bad oscillator level '{x}'")))
                };
                Ok(StateSpec::Oscillator(level(m)?, level(n)?))
            }
            "psi+" | "psi-" => {
                let cutoff = parse_f64(need("a cutoff L")?)?;
                if cutoff <= 0.0 {
                    return Err(Error::Parse(format!("cutoff {cutoff} must be positive")));
                }
                let sign = if head == "psi+" { Sign::Plus } else { Sign::Minus };
                Ok(StateSpec::Psi { cutoff, sign })
            }
            "random" => need("a seed")?
                .trim()
                .parse()
                .map(StateSpec::Random)
                .map_err(|_| Error::Parse(format!("bad seed in '{s}'"))),
            "cat" => Ok(StateSpec::Cat(parse_f64(need("a displacement")?)?)),
            "file" => {
                let p = need("a path")?;
                if p.is_empty() {
                    return Err(Error::Parse("empty path".into()));
                }
                Ok(StateSpec::File(PathBuf::from(p)))
            }
            _ => Err(Error::Parse(format!("unknown state '{s}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Gaussian => write!(f, "gaussian"),
            StateSpec::Oscillator(m, n) => write!(f, "ho:{m},{n}"),
            StateSpec::Psi { cutoff, sign } => write!(f, "psi{sign}:{cutoff}"),
            StateSpec::Random(seed) => write!(f, "random:{seed}"),
            StateSpec::Cat(d) => write!(f, "cat:{d}"),
            StateSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_states_are_orthonormal() {
        let a = Axis::symmetric(128, 10.0).unwrap();
        let states: Vec<_> = (0..5).map(|n| ho_eigenstate(a, n).unwrap()).collect();
        for (i, s) in states.iter().enumerate() {
            for (j, t) in states.iter().enumerate() {
                let ip = s.amplitudes().inner(t.amplitudes());
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-12 && ip.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn oscillator_momentum_picks_up_power_of_minus_i() {
        let a = Axis::symmetric(128, 10.0).unwrap();
        for n in 0..4 {
            let phi = ho_eigenstate(a, n).unwrap();
            let mt = phi.momentum();
            let factor = Complex64::new(0.0, -1.0).powu(n as u32);
            for (k, v) in mt.values().iter().enumerate() {
                let expected = factor * ho_value(n, a.dual().point(k));
                assert!((v - expected).norm() < 1e-8, "n={n}");
            }
        }
    }

    #[test]
    fn profile_integral_is_one() {
        // Midpoint sum on [0, L]: ∫₀^∞ h_L² = 1.
        for cutoff in [1.0, 10.0, 100.0] {
            let p = RegularizedSqrtState::new(cutoff).unwrap();
            let axis = Axis::new(8192, 0.0, cutoff).unwrap();
            let s: f64 = axis.points().iter().map(|&q| p.h(q).powi(2)).sum::<f64>() * axis.step();
            assert!((s - 1.0).abs() < 1e-4, "L={cutoff}: {s}");
        }
    }

    #[test]
    fn even_and_odd_profiles() {
        let p = RegularizedSqrtState::new(5.0).unwrap();
        let axis = Axis::symmetric(4096, 6.0).unwrap();
        let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
        for q in axis.points() {
            assert_eq!(p.even(q), p.even(-q));
            assert_eq!(p.odd(q), -p.odd(-q));
            aa += p.even(q).powi(2);
            bb += p.odd(q).powi(2);
            ab += p.even(q) * p.odd(q);
        }
        let h = axis.step();
        assert!((aa * h - 1.0).abs() < 1e-3);
        assert!((bb * h - 1.0).abs() < 1e-3);
        assert!(ab.abs() * h < 1e-14);
    }

    #[test]
    fn psi_l_requires_box_unless_truncating() {
        let a = Axis::symmetric(64, 5.0).unwrap();
        assert!(psi_l(10.0, Sign::Plus, [a, a], false).is_err());
        let t = psi_l(10.0, Sign::Plus, [a, a], true).unwrap();
        assert!(t.truncated);
        assert!(psi_l(-1.0, Sign::Plus, [a, a], true).is_err());
    }

    #[test]
    fn psi_l_is_normalised_and_signs_are_orthogonal() {
        let a = Axis::symmetric(256, 12.0).unwrap();
        let plus = psi_l(10.0, Sign::Plus, [a, a], false).unwrap();
        let minus = psi_l(10.0, Sign::Minus, [a, a], false).unwrap();
        assert!((plus.state.amplitudes().norm_sqr() - 1.0).abs() < 1e-9);
        assert!(plus.norm_deficit().abs() < 1e-2);
        // Oracle: ⟨Ψ+|Ψ-⟩ ∝ Σ (1 + c s)^* (1 - c s) h²h² with |c| = 1 and
        // s = ±1 equally weighted by symmetry; it vanishes term by term in s.
        let ip = plus.state.inner(&minus.state);
        assert!(ip.norm() < 1e-12, "{ip}");
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["gaussian", "ho:0,1", "psi+:10", "psi-:2.5", "random:42", "cat:2", "file:/tmp/x"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
        for bad in ["", "gauss", "ho:1", "ho:a,b", "psi+:-3", "psi+:nan", "random:x", "file:", "gaussian:1"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }
}
