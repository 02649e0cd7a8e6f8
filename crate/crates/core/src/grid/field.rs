use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Axis;
use crate::error::{Error, Result};

/// Dense values on a tensor grid, row-major (the first axis varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T, const D: usize> {
    axes: [Axis; D],
    values: Vec<T>,
}

pub type RealField1D = Field<f64, 1>;
pub type ComplexField1D = Field<Complex64, 1>;
pub type RealField2D = Field<f64, 2>;
pub type ComplexField2D = Field<Complex64, 2>;
/// Phase-space field with axes ordered `(q1, q2, p1, p2)`.
pub type RealField4D = Field<f64, 4>;

impl<T, const D: usize> Field<T, D> {
    pub fn from_values(axes: [Axis; D], values: Vec<T>) -> Result<Self> {
        let expected: usize = axes.iter().map(Axis::len).product();
        if values.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Field { axes, values })
    }

    pub fn axes(&self) -> &[Axis; D] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn shape(&self) -> [usize; D] {
        self.axes.map(|a| a.len())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stride of axis `k` in the flat value array.
    pub fn stride(&self, k: usize) -> usize {
        self.axes[k + 1..].iter().map(Axis::len).product()
    }

    /// Product of the axis steps (the quadrature cell volume).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::step).product()
    }

    pub fn flat_index(&self, idx: [usize; D]) -> usize {
        idx.iter()
            .zip(self.axes.iter())
            .fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; D] {
        let mut idx = [0; D];
        for k in (0..D).rev() {
            let n = self.axes[k].len();
            idx[k] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U, D> {
        Field {
            axes: self.axes,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub(crate) fn with_axis(mut self, k: usize, axis: Axis) -> Self {
        debug_assert_eq!(self.axes[k].len(), axis.len());
        self.axes[k] = axis;
        self
    }
}

impl<T: Clone, const D: usize> Field<T, D> {
    pub fn filled(axes: [Axis; D], value: T) -> Self {
        let n = axes.iter().map(Axis::len).product();
        Field {
            axes,
            values: vec![value; n],
        }
    }
}

impl<T: Copy, const D: usize> Field<T, D> {
    pub fn get(&self, idx: [usize; D]) -> T {
        self.values[self.flat_index(idx)]
    }

    pub fn from_fn(axes: [Axis; D], mut f: impl FnMut([f64; D]) -> T) -> Self {
        let n: usize = axes.iter().map(Axis::len).product();
        let mut values = Vec::with_capacity(n);
        let mut idx = [0usize; D];
        for _ in 0..n {
            let mut x = [0.0; D];
            for k in 0..D {
                x[k] = axes[k].point(idx[k]);
            }
            values.push(f(x));
            for k in (0..D).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        Field { axes, values }
    }
}

impl<const D: usize> Field<f64, D> {
    pub fn zeros(axes: [Axis; D]) -> Self {
        Self::filled(axes, 0.0)
    }

    /// Midpoint-rule integral.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise difference; panics on mismatched shapes.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Integral of the absolute difference (L¹ distance).
    pub fn l1_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.cell_volume()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.cell_volume()
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// Sums out every axis not listed in `keep`, multiplying by the dropped
    /// steps. The result keeps the listed axes in the given order.
    pub fn marginal<const K: usize>(&self, keep: [usize; K]) -> Result<Field<f64, K>> {
        for (i, &k) in keep.iter().enumerate() {
            if k >= D || keep[..i].contains(&k) {
                return Err(Error::AxisMismatch(format!("invalid axis selection {keep:?}")));
            }
        }
        let out_axes: [Axis; K] = keep.map(|k| self.axes[k]);
        let mut out = Field::<f64, K>::zeros(out_axes);
        let strides: [usize; K] = {
            let mut s = [0; K];
            for i in (0..K).rev() {
                s[i] = if i + 1 < K {
                    s[i + 1] * out_axes[i + 1].len()
                } else {
                    1
                };
            }
            s
        };
        let mut idx = [0usize; D];
        for &v in &self.values {
            let mut o = 0;
            for i in 0..K {
                o += idx[keep[i]] * strides[i];
            }
            out.values[o] += v;
            for k in (0..D).rev() {
                idx[k] += 1;
                if idx[k] < self.axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        let dropped: f64 = (0..D)
            .filter(|k| !keep.contains(k))
            .map(|k| self.axes[k].step())
            .product();
        out.scale(dropped);
        Ok(out)
    }
}

impl<const D: usize> Field<Complex64, D> {
    /// Squared norm, `Σ |v|² · cell volume`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn abs_sqr(&self) -> Field<f64, D> {
        self.map(|v| v.norm_sqr())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `⟨self|other⟩` with the quadrature weight.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.cell_volume()
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }
}

impl RealField4D {
    /// Marginal onto one of the four two-variable pairs.
    pub fn marginalize(&self, keep: VariablePair) -> RealField2D {
        self.marginal(keep.axes())
            .expect("variable pairs are always valid selections")
    }
}

/// The four two-variable projections of a phase-space density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariablePair {
    /// `(q1, q2)`
    QQ,
    /// `(q1, p2)`
    QP,
    /// `(p1, q2)`
    PQ,
    /// `(p1, p2)`
    PP,
}

impl VariablePair {
    pub const ALL: [VariablePair; 4] = [
        VariablePair::QQ,
        VariablePair::QP,
        VariablePair::PQ,
        VariablePair::PP,
    ];

    /// Axis indices into a `(q1, q2, p1, p2)` field.
    pub fn axes(self) -> [usize; 2] {
        match self {
            VariablePair::QQ => [0, 1],
            VariablePair::QP => [0, 3],
            VariablePair::PQ => [2, 1],
            VariablePair::PP => [2, 3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariablePair::QQ => "qq",
            VariablePair::QP => "qp",
            VariablePair::PQ => "pq",
            VariablePair::PP => "pp",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "qq" => Ok(VariablePair::QQ),
            "qp" => Ok(VariablePair::QP),
            "pq" => Ok(VariablePair::PQ),
            "pp" => Ok(VariablePair::PP),
            other => Err(Error::Parse(format!("unknown variable pair '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ax(n: usize, a: f64, b: f64) -> Axis {
        Axis::new(n, a, b).unwrap()
    }

    #[test]
    fn constant_integrates_exactly() {
        for n in [4, 16, 128] {
            let f = RealField2D::filled([ax(n, 0.0, 1.0), ax(n, 0.0, 1.0)], 1.0);
            assert!((f.integrate() - 1.0).abs() < 1e-14);
        }
        let g = RealField4D::filled([ax(8, 0.0, 1.0); 4], 1.0);
        assert!((g.integrate() - 1.0).abs() < 1e-14);
        assert_eq!(RealField4D::zeros([ax(4, 0.0, 1.0); 4]).integrate(), 0.0);
        assert_eq!(RealField2D::zeros([ax(4, 0.0, 1.0); 2]).integrate(), 0.0);
    }

    #[test]
    fn shape_is_checked() {
        assert!(RealField2D::from_values([ax(4, 0.0, 1.0); 2], vec![0.0; 15]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let f = RealField4D::zeros([ax(4, 0.0, 1.0), ax(8, 0.0, 1.0), ax(4, 0.0, 1.0), ax(16, 0.0, 1.0)]);
        for flat in [0, 1, 17, 511, 2047] {
            assert_eq!(f.flat_index(f.multi_index(flat)), flat);
        }
        assert_eq!(f.stride(0), 8 * 4 * 16);
        assert_eq!(f.stride(3), 1);
    }

    #[test]
    fn product_density_marginal_separates() {
        let a = [ax(8, -2.0, 2.0), ax(8, -1.0, 3.0)];
        let b = [ax(16, -4.0, 4.0), ax(4, -1.0, 1.0)];
        let fa = RealField2D::from_fn(a, |[x, y]| (-(x * x) - y * y / 2.0).exp());
        let fb = RealField2D::from_fn(b, |[x, y]| 1.0 + (x * y).sin().abs());
        let rho = RealField4D::from_fn([a[0], a[1], b[0], b[1]], |[q1, q2, p1, p2]| {
            (-(q1 * q1) - q2 * q2 / 2.0).exp() * (1.0 + (p1 * p2).sin().abs())
        });
        let m = rho.marginalize(VariablePair::QQ);
        let mut expected = fa.clone();
        expected.scale(fb.integrate());
        assert!(m.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn marginal_rejects_bad_selection() {
        let f = RealField4D::zeros([ax(4, 0.0, 1.0); 4]);
        assert!(f.marginal([0, 0]).is_err());
        assert!(f.marginal([0, 4]).is_err());
    }

    #[test]
    fn marginals_preserve_mass() {
        let axes = [ax(8, -1.0, 1.0), ax(4, 0.0, 2.0), ax(8, -3.0, 3.0), ax(4, -1.0, 0.0)];
        let rho = RealField4D::from_fn(axes, |[a, b, c, d]| (a + 2.0 * b - c * d).cos().powi(2));
        let total = rho.integrate();
        for pair in VariablePair::ALL {
            let m = rho.marginalize(pair);
            assert!((m.integrate() - total).abs() < 1e-12 * total.max(1.0));
            assert_eq!(m.axes()[0], axes[pair.axes()[0]]);
            assert_eq!(m.axes()[1], axes[pair.axes()[1]]);
        }
    }
}
