use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{one_var_marginals, MarginalTriple, OneVar, NORM_TOL};
use crate::error::{Error, Result};
use crate::grid::{Axis, RealField4D, VariablePair};

/// Largest mass the support threshold may discard.
pub const MASS_LOSS_LIMIT: f64 = 1e-8;
/// `|Δ/ρ₀| ≤ DEGENERATE_TOL` on all of `E` counts as `Δ ≡ 0`.
const DEGENERATE_TOL: f64 = 1e-12;

/// The support `E` of the construction on the 4D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSet {
    mask: Vec<bool>,
    axes: [Axis; 4],
    /// Relative threshold `ε`.
    pub epsilon: f64,
    /// Absolute thresholds on `A`, `B`, `C`.
    pub thresholds: [f64; 3],
}

impl SupportSet {
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn axes(&self) -> [Axis; 4] {
        self.axes
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// `ρ₀ = A · B · C / (s1 · s2)` on `E`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct Rho0 {
    pub rho: RealField4D,
    pub support: SupportSet,
    pub one_var: OneVar,
    /// Input mass minus `∫ρ₀`.
    pub mass_deficit: f64,
}

/// Chain indices `(v0, v1, v2, v3)` of every flat 4D index.
fn for_each_point(axes: [Axis; 4], chain: [usize; 4], mut f: impl FnMut(usize, [usize; 4])) {
    let shape = axes.map(|a| a.len());
    let mut idx = [0usize; 4];
    let total: usize = shape.iter().product();
    for flat in 0..total {
        f(flat, chain.map(|c| idx[c]));
        for k in (0..4).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

pub fn rho0(triple: &MarginalTriple, epsilon: f64) -> Result<Rho0> {
    if !(epsilon >= 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidDistribution(format!("threshold {epsilon} outside [0, 1)")));
    }
    let one_var = one_var_marginals(triple)?;
    let [a, b, c] = triple.fields();
    let thresholds = [a, b, c].map(|f| epsilon * f.max_value());
    let axes = triple.axes4();
    let mut rho = RealField4D::zeros(axes);
    let mut mask = vec![false; rho.len()];
    let (s1, s2) = (one_var.s1.values(), one_var.s2.values());
    let vals = rho.values_mut();
    for_each_point(axes, triple.chain(), |flat, [i0, i1, i2, i3]| {
        let (va, vb, vc) = (a.get([i0, i1]), b.get([i2, i1]), c.get([i2, i3]));
        if va > thresholds[0] && vb > thresholds[1] && vc > thresholds[2] {
            mask[flat] = true;
            vals[flat] = va * vb * vc / (s1[i1] * s2[i2]);
        }
    });
    let mass_deficit = a.integrate() - rho.integrate();
    if mass_deficit.abs() > MASS_LOSS_LIMIT {
        return Err(Error::MassLoss {
            deficit: mass_deficit,
            limit: MASS_LOSS_LIMIT,
        });
    }
    Ok(Rho0 {
        rho,
        support: SupportSet {
            mask,
            axes,
            epsilon,
            thresholds,
        },
        one_var,
        mass_deficit,
    })
}

fn check_axes(f: &RealField4D, triple: &MarginalTriple) -> Result<()> {
    if *f.axes() != triple.axes4() {
        return Err(Error::AxisMismatch("4D field is not on the triple's grid".into()));
    }
    Ok(())
}

/// `Δ = F - ρ₀ [F_A/A + F_B/B + F_C/C - F_1/s1 - F_2/s2]` on `E`, where
/// `F_X` is the projection of `F` onto the variables of `X`.
pub fn delta_from_f(f: &RealField4D, triple: &MarginalTriple, r0: &Rho0) -> Result<RealField4D> {
    check_axes(f, triple)?;
    let mask = r0.support.mask();
    if let Some(i) = (0..f.len()).find(|&i| !mask[i] && f.values()[i] != 0.0) {
        return Err(Error::SupportViolation(format!(
            "F is nonzero at {:?} outside E",
            f.multi_index(i)
        )));
    }
    let [v0, v1, v2, v3] = triple.chain();
    let fa = f.marginal([v0, v1])?;
    let fb = f.marginal([v2, v1])?;
    let fc = f.marginal([v2, v3])?;
    let f1 = f.marginal([v1])?;
    let f2 = f.marginal([v2])?;
    let [a, b, c] = triple.fields();
    let (s1, s2) = (r0.one_var.s1.values(), r0.one_var.s2.values());
    let mut delta = RealField4D::zeros(*f.axes());
    let out = delta.values_mut();
    for_each_point(triple.axes4(), triple.chain(), |flat, [i0, i1, i2, i3]| {
        if mask[flat] {
            let bracket = fa.get([i0, i1]) / a.get([i0, i1])
                + fb.get([i2, i1]) / b.get([i2, i1])
                + fc.get([i2, i3]) / c.get([i2, i3])
                - f1.values()[i1] / s1[i1]
                - f2.values()[i2] / s2[i2];
            out[flat] = f.values()[flat] - r0.rho.values()[flat] * bracket;
        }
    });
    Ok(delta)
}

/// `m± ` and the admissible interval `[-1/m₊, 1/m₋]`. An infinite `m`
/// maps its endpoint to 0; `Δ ≡ 0` gives the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRange {
    pub m_plus: f64,
    pub m_minus: f64,
    pub lower: f64,
    pub upper: f64,
    pub degenerate: bool,
}

impl LambdaRange {
    pub fn contains(&self, lambda: f64) -> bool {
        let slack = 1e-12 * lambda.abs().max(1.0);
        self.degenerate || (lambda >= self.lower - slack && lambda <= self.upper + slack)
    }
}

pub fn lambda_range(delta: &RealField4D, r0: &Rho0) -> LambdaRange {
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for ((&d, &r), &m) in delta.values().iter().zip(r0.rho.values()).zip(r0.support.mask()) {
        if m {
            let ratio = d / r;
            sup = sup.max(ratio);
            inf = inf.min(ratio);
        }
    }
    if !sup.is_finite() && !inf.is_finite() || sup.abs().max(inf.abs()) <= DEGENERATE_TOL {
        return LambdaRange {
            m_plus: 0.0,
            m_minus: 0.0,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            degenerate: true,
        };
    }
    let (m_plus, m_minus) = (sup, -inf);
    let end = |m: f64| if m > 0.0 { 1.0 / m } else { f64::INFINITY };
    LambdaRange {
        m_plus,
        m_minus,
        lower: -end(m_plus),
        upper: end(m_minus),
        degenerate: false,
    }
}

/// `ρ₀ + λΔ`, rejecting `λ` outside the admissible interval.
pub fn general_density(r0: &Rho0, delta: &RealField4D, lambda: f64, range: &LambdaRange) -> Result<RealField4D> {
    if !range.contains(lambda) {
        return Err(Error::LambdaOutOfRange {
            lambda,
            lower: range.lower,
            upper: range.upper,
        });
    }
    Ok(general_density_unchecked(r0, delta, lambda))
}

pub fn general_density_unchecked(r0: &Rho0, delta: &RealField4D, lambda: f64) -> RealField4D {
    let mut rho = r0.rho.clone();
    for (r, d) in rho.values_mut().iter_mut().zip(delta.values()) {
        *r += lambda * d;
    }
    rho
}

/// Residuals of a constructed family, all in L¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub rho0_marginals: [f64; 3],
    pub rho0_mass_deficit: f64,
    pub delta_projections: [f64; 3],
    pub delta_integral: f64,
}

#[derive(Debug, Clone)]
pub struct SolutionFamily {
    pub rho0: Rho0,
    pub delta: RealField4D,
    pub range: LambdaRange,
    pub f_provenance: String,
    pub residuals: ResidualTable,
    pub dropped: VariablePair,
}

impl SolutionFamily {
    pub fn build(triple: &MarginalTriple, rho0: Rho0, f: &RealField4D, f_provenance: &str) -> Result<Self> {
        let delta = delta_from_f(f, triple, &rho0)?;
        let range = lambda_range(&delta, &rho0);
        let [v0, v1, v2, v3] = triple.chain();
        let sel = [[v0, v1], [v2, v1], [v2, v3]];
        let fields = triple.fields();
        let mut rho0_marginals = [0.0; 3];
        let mut delta_projections = [0.0; 3];
        for k in 0..3 {
            rho0_marginals[k] = rho0.rho.marginal(sel[k])?.l1_diff(fields[k]);
            delta_projections[k] = delta.marginal(sel[k])?.l1_norm();
        }
        let residuals = ResidualTable {
            rho0_marginals,
            rho0_mass_deficit: rho0.mass_deficit,
            delta_projections,
            delta_integral: delta.integrate(),
        };
        Ok(SolutionFamily {
            rho0,
            delta,
            range,
            f_provenance: f_provenance.to_string(),
            residuals,
            dropped: triple.dropped(),
        })
    }

    pub fn density(&self, lambda: f64) -> Result<RealField4D> {
        general_density(&self.rho0, &self.delta, lambda, &self.range)
    }

    pub fn manifest(&self) -> FamilyManifest {
        let finite = |x: f64| x.is_finite().then_some(x);
        FamilyManifest {
            dropped: self.dropped,
            epsilon: self.rho0.support.epsilon,
            thresholds: self.rho0.support.thresholds,
            support_points: self.rho0.support.count(),
            m_plus: finite(self.range.m_plus),
            m_minus: finite(self.range.m_minus),
            lambda_lower: finite(self.range.lower),
            lambda_upper: finite(self.range.upper),
            degenerate: self.range.degenerate,
            f_provenance: self.f_provenance.clone(),
            residuals: self.residuals,
            axes: self.rho0.support.axes(),
            files: vec!["rho0.psf".into(), "delta.psf".into()],
        }
    }

    /// Writes `rho0.psf`, `delta.psf` (with sidecars) and `manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<FamilyManifest> {
        std::fs::create_dir_all(dir)?;
        let manifest = self.manifest();
        let extra = serde_json::to_value(&manifest)?;
        crate::io::write_real(&dir.join("rho0.psf"), &self.rho0.rho, "particular solution rho0", extra.clone())?;
        crate::io::write_real(&dir.join("delta.psf"), &self.delta, "perturbation direction delta", extra)?;
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}

/// JSON description of a [`SolutionFamily`]; unbounded values are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub dropped: VariablePair,
    pub epsilon: f64,
    pub thresholds: [f64; 3],
    pub support_points: usize,
    pub m_plus: Option<f64>,
    pub m_minus: Option<f64>,
    pub lambda_lower: Option<f64>,
    pub lambda_upper: Option<f64>,
    pub degenerate: bool,
    pub f_provenance: String,
    pub residuals: ResidualTable,
    pub axes: [Axis; 4],
    pub files: Vec<String>,
}

/// Expresses a nonnegative solution `ρ₁` of the triple as `ρ₀ + 1·Δ` with
/// `F = ρ₁`.
pub fn represent(rho1: &RealField4D, triple: &MarginalTriple, epsilon: f64) -> Result<SolutionFamily> {
    check_axes(rho1, triple)?;
    let scale = rho1.max_abs();
    if rho1.values().iter().any(|&v| !v.is_finite() || v < -1e-14 * scale) {
        return Err(Error::InvalidDistribution("rho1 is negative or not finite".into()));
    }
    let [v0, v1, v2, v3] = triple.chain();
    for (sel, field) in [[v0, v1], [v2, v1], [v2, v3]].into_iter().zip(triple.fields()) {
        let r = rho1.marginal(sel)?.l1_diff(field);
        if r > NORM_TOL {
            return Err(Error::Inconsistent(format!("rho1 misses a prescribed marginal by {r:.3e}")));
        }
    }
    let r0 = rho0(triple, epsilon)?;
    let mut f = rho1.clone();
    let mut outside = 0.0;
    for (v, &m) in f.values_mut().iter_mut().zip(r0.support.mask()) {
        if !m {
            outside += v.abs();
            *v = 0.0;
        }
    }
    outside *= rho1.cell_volume();
    if outside > MASS_LOSS_LIMIT {
        return Err(Error::SupportViolation(format!("rho1 has mass {outside:.3e} outside E")));
    }
    SolutionFamily::build(triple, r0, &f, "represent")
}

fn smooth_axis(f: &mut RealField4D, k: usize, kernel: &[f64]) {
    let n = f.axis(k).len();
    let stride = f.stride(k);
    let r = (kernel.len() / 2) as isize;
    let src = f.values().to_vec();
    let out = f.values_mut();
    for (flat, o) in out.iter_mut().enumerate() {
        let i = ((flat / stride) % n) as isize;
        let base = flat as isize - i * stride as isize;
        let mut acc = 0.0;
        for (t, w) in kernel.iter().enumerate() {
            let j = i + t as isize - r;
            if (0..n as isize).contains(&j) {
                acc += w * src[(base + j * stride as isize) as usize];
            }
        }
        *o = acc;
    }
}

/// A smooth positive random field, normalised and masked to `E`.
///
/// White noise from a seeded ChaCha stream is smoothed by a separable
/// Gaussian kernel of standard deviation `correlation` grid cells,
/// standardised, and passed through `exp(g/2)`.
pub fn random_f(seed: u64, support: &SupportSet, correlation: f64) -> RealField4D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = RealField4D::from_fn(support.axes(), |_| rng.random_range(-1.0..1.0));
    if correlation > 0.0 {
        let r = (3.0 * correlation).ceil() as isize;
        let kernel: Vec<f64> = (-r..=r)
            .map(|t| (-0.5 * (t as f64 / correlation).powi(2)).exp())
            .collect();
        for k in 0..4 {
            smooth_axis(&mut f, k, &kernel);
        }
    }
    let n = f.len() as f64;
    let mean = f.values().iter().sum::<f64>() / n;
    let sd = (f.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-300);
    for (v, &m) in f.values_mut().iter_mut().zip(support.mask()) {
        *v = if m { (0.5 * (*v - mean) / sd).exp() } else { 0.0 };
    }
    let mass = f.integrate();
    f.scale(1.0 / mass);
    f
}

/// `F ⊙ ρ₀`, normalised. Keeps `F/ρ₀` bounded where the marginals are tiny.
pub fn envelope(f: &RealField4D, r0: &Rho0) -> RealField4D {
    let mut out = f.clone();
    for (v, r) in out.values_mut().iter_mut().zip(r0.rho.values()) {
        *v *= r;
    }
    let mass = out.integrate();
    out.scale(1.0 / mass);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RealField2D;
    use crate::state::{gaussian_1d, product_density, psi_l, random_state, Sign, WaveFunction2D};

    fn quantum_triple(seed: u64, n: usize) -> MarginalTriple {
        let a = Axis::symmetric(n, 5.0).unwrap();
        let q = random_state([a, a], seed).unwrap().quantum_marginals();
        MarginalTriple::from_quartet(&q, VariablePair::QP).unwrap()
    }

    /// A triple from a strictly positive random density, so no point is
    /// thresholded away.
    fn positive_triple(seed: u64) -> (MarginalTriple, RealField4D) {
        let a = Axis::symmetric(8, 3.0).unwrap();
        let axes = [a, a, a.dual(), a.dual()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rho = RealField4D::from_fn(axes, |_| rng.random_range(0.1..1.0));
        let m = rho.integrate();
        rho.scale(1.0 / m);
        let t = MarginalTriple::standard(
            rho.marginalize(VariablePair::QQ),
            rho.marginalize(VariablePair::PQ),
            rho.marginalize(VariablePair::PP),
        )
        .unwrap();
        (t, rho)
    }

    #[test]
    fn factorized_triple_collapses() {
        let a = Axis::symmetric(8, 3.0).unwrap();
        let d = a.dual();
        let bump = |ax: Axis, c: f64| {
            let v: Vec<f64> = ax.points().iter().map(|x| 1.0 + 0.5 * (x * c).sin()).collect();
            let s: f64 = v.iter().sum::<f64>() * ax.step();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let (f, g, h, k) = (bump(a, 0.7), bump(a, -0.3), bump(d, 0.2), bump(d, 0.9));
        let outer = |x: &[f64], y: &[f64], ax: Axis, ay: Axis| {
            RealField2D::from_values([ax, ay], x.iter().flat_map(|u| y.iter().map(move |v| u * v)).collect()).unwrap()
        };
        let t = MarginalTriple::standard(outer(&f, &g, a, a), outer(&h, &g, d, a), outer(&h, &k, d, d)).unwrap();
        let r = rho0(&t, 1e-12).unwrap();
        for (flat, v) in r.rho.values().iter().enumerate() {
            let [i, j, l, m] = r.rho.multi_index(flat);
            assert!((v - f[i] * g[j] * h[l] * k[m]).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_rho0_is_product_density() {
        let a = Axis::symmetric(16, 6.0).unwrap();
        let f = gaussian_1d(a, 0.3, 0.9, 0.5).unwrap();
        let g = gaussian_1d(a, -0.2, 1.1, -0.4).unwrap();
        let q = WaveFunction2D::product(&f, &g).quantum_marginals();
        let t = MarginalTriple::from_quartet(&q, VariablePair::QP).unwrap();
        let r = rho0(&t, 1e-12).unwrap();
        let oracle = product_density(&f, &g);
        assert!(r.rho.max_abs_diff(&oracle) < 1e-8);
    }

    #[test]
    fn psi_plus_marginals_reproduced() {
        let a = Axis::symmetric(32, 12.0).unwrap();
        let psi = psi_l(10.0, Sign::Plus, [a, a], false).unwrap().state;
        let t = MarginalTriple::from_quartet(&psi.quantum_marginals(), VariablePair::QP).unwrap();
        let r = rho0(&t, 1e-12).unwrap();
        let [v0, v1, v2, v3] = t.chain();
        for (sel, f) in [[v0, v1], [v2, v1], [v2, v3]].into_iter().zip(t.fields()) {
            assert!(r.rho.marginal(sel).unwrap().l1_diff(f) <= 1e-5);
        }
    }

    #[test]
    fn mass_loss_is_an_error() {
        let t = quantum_triple(1, 16);
        assert!(matches!(rho0(&t, 0.5), Err(Error::MassLoss { .. })));
    }

    #[test]
    fn fixed_point_and_scaling() {
        let t = quantum_triple(3, 16);
        let r = rho0(&t, 1e-12).unwrap();
        for c in [1.0, 2.5] {
            let mut f = r.rho.clone();
            f.scale(c);
            let d = delta_from_f(&f, &t, &r).unwrap();
            assert!(d.max_abs() <= 1e-10 * c.max(1.0));
            assert!(lambda_range(&d, &r).degenerate);
        }
    }

    #[test]
    fn unweighted_f_projections_vanish() {
        let (t, _) = positive_triple(5);
        let r = rho0(&t, 1e-12).unwrap();
        assert_eq!(r.support.count(), r.rho.len());
        let f = random_f(9, &r.support, 1.5);
        let fam = SolutionFamily::build(&t, r, &f, "random").unwrap();
        for p in fam.residuals.delta_projections {
            assert!(p <= 1e-9, "{p}");
        }
        assert!(fam.residuals.delta_integral.abs() <= 1e-9);
        assert!(fam.range.m_plus > 0.0 && fam.range.m_minus > 0.0);
    }

    #[test]
    fn enveloped_f_on_quantum_triple() {
        let t = quantum_triple(7, 16);
        let r = rho0(&t, 1e-12).unwrap();
        let f = envelope(&random_f(1, &r.support, 1.0), &r);
        let fam = SolutionFamily::build(&t, r, &f, "random").unwrap();
        for p in fam.residuals.delta_projections {
            assert!(p <= 1e-9, "{p}");
        }
        // Exhaustive scan oracle for the interval.
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (i, &m) in fam.rho0.support.mask().iter().enumerate() {
            if m {
                let q = fam.delta.values()[i] / fam.rho0.rho.values()[i];
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        assert_eq!(fam.range.lower, -1.0 / hi);
        assert_eq!(fam.range.upper, 1.0 / -lo);

        let mid = 0.5 * (fam.range.lower + fam.range.upper);
        assert!(fam.density(mid).unwrap().min_value() >= -1e-12);
        let edge = fam.density(fam.range.upper).unwrap();
        let worst = edge
            .values()
            .iter()
            .zip(fam.rho0.support.mask())
            .filter(|(_, &m)| m)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min);
        assert!(worst.abs() <= 1e-9);
        let over = 1.1 * fam.range.upper;
        assert!(matches!(fam.density(over), Err(Error::LambdaOutOfRange { .. })));
        assert!(general_density_unchecked(&fam.rho0, &fam.delta, over).min_value() < 0.0);
        assert_eq!(general_density_unchecked(&fam.rho0, &fam.delta, 0.0), fam.rho0.rho);
    }

    #[test]
    fn delta_is_linear_in_f() {
        let (t, _) = positive_triple(2);
        let r = rho0(&t, 1e-12).unwrap();
        let f1 = random_f(1, &r.support, 1.0);
        let f2 = random_f(2, &r.support, 2.0);
        let mut combo = f1.clone();
        for (c, v) in combo.values_mut().iter_mut().zip(f2.values()) {
            *c = 0.7 * *c - 1.3 * v;
        }
        let d1 = delta_from_f(&f1, &t, &r).unwrap();
        let d2 = delta_from_f(&f2, &t, &r).unwrap();
        let dc = delta_from_f(&combo, &t, &r).unwrap();
        let worst = dc
            .values()
            .iter()
            .zip(d1.values().iter().zip(d2.values()))
            .map(|(c, (a, b))| (c - (0.7 * a - 1.3 * b)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10);
    }

    #[test]
    fn represent_round_trips() {
        let (t, rho1) = positive_triple(4);
        let fam = represent(&rho1, &t, 1e-12).unwrap();
        assert!(fam.range.m_minus <= 1.0 + 1e-9);
        assert!(fam.density(1.0).unwrap().max_abs_diff(&rho1) < 1e-9);

        // A member of a random family is represented again.
        let r = rho0(&t, 1e-12).unwrap();
        let f = random_f(3, &r.support, 1.0);
        let fam = SolutionFamily::build(&t, r, &f, "random").unwrap();
        let lam = 0.6 * fam.range.upper;
        let member = fam.density(lam).unwrap();
        let back = represent(&member, &t, 1e-12).unwrap();
        assert!(back.range.m_minus <= 1.0 + 1e-9);
        assert!(back.density(1.0).unwrap().max_abs_diff(&member) < 1e-8);

        // ρ₁ = ρ₀ gives Δ = 0.
        let same = represent(&fam.rho0.rho, &t, 1e-12).unwrap();
        assert!(same.delta.max_abs() < 1e-10);
    }

    #[test]
    fn product_density_round_trip() {
        let a = Axis::symmetric(16, 6.0).unwrap();
        let f = gaussian_1d(a, 0.3, 0.9, 0.5).unwrap();
        let g = gaussian_1d(a, -0.2, 1.1, -0.4).unwrap();
        let rho1 = product_density(&f, &g);
        let q = WaveFunction2D::product(&f, &g).quantum_marginals();
        let t = MarginalTriple::from_quartet(&q, VariablePair::QP).unwrap();
        let fam = represent(&rho1, &t, 1e-12).unwrap();
        assert!(fam.density(1.0).unwrap().max_abs_diff(&rho1) < 1e-8);
    }

    #[test]
    fn support_violation_and_determinism() {
        let t = quantum_triple(3, 16);
        let r = rho0(&t, 1e-6).unwrap_or_else(|_| rho0(&t, 1e-12).unwrap());
        let f = random_f(4, &r.support, 1.0);
        assert_eq!(f, random_f(4, &r.support, 1.0));
        assert_ne!(f, random_f(5, &r.support, 1.0));
        assert!(f.values().iter().zip(r.support.mask()).all(|(v, &m)| m || *v == 0.0));
        if let Some(i) = r.support.mask().iter().position(|&m| !m) {
            let mut bad = f.clone();
            bad.values_mut()[i] = 1.0;
            assert!(matches!(delta_from_f(&bad, &t, &r), Err(Error::SupportViolation(_))));
        }
    }

    #[test]
    fn alternative_chain_ordering() {
        let a = Axis::symmetric(16, 5.0).unwrap();
        let q = random_state([a, a], 12).unwrap().quantum_marginals();
        for dropped in [VariablePair::PP, VariablePair::QQ, VariablePair::PQ] {
            let t = MarginalTriple::from_quartet(&q, dropped).unwrap();
            let r = rho0(&t, 1e-12).unwrap();
            let (_, pairs) = super::super::chain_for(dropped);
            for p in pairs {
                let got = r.rho.marginalize(p);
                let want = q.get(p).as_grid().unwrap();
                assert!(got.l1_diff(want) <= 1e-6, "{dropped:?} {p:?}");
            }
            let f = envelope(&random_f(6, &r.support, 1.0), &r);
            let fam = SolutionFamily::build(&t, r, &f, "random").unwrap();
            assert!(fam.residuals.delta_projections.iter().all(|&x| x <= 1e-9));
        }
    }

    #[test]
    fn manifest_writes_and_nulls_infinities() {
        let t = quantum_triple(3, 8);
        let r = rho0(&t, 1e-12).unwrap();
        let f = r.rho.clone();
        let fam = SolutionFamily::build(&t, r, &f, "rho0").unwrap();
        assert!(fam.range.degenerate);
        let dir = std::env::temp_dir().join(format!("phasebell-family-{}", std::process::id()));
        let m = fam.write(&dir).unwrap();
        assert_eq!(m.lambda_upper, None);
        let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
        let back: FamilyManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let rho = crate::io::read(&dir.join("rho0.psf")).unwrap();
        assert!(matches!(rho, crate::io::AnyField::Real4(_)));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
