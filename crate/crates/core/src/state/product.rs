use super::WaveFunction1D;
use crate::grid::{Field, RealField4D};

/// `|Φ1(q1)|² |Φ2(q2)|² |Φ̃1(p1)|² |Φ̃2(p2)|²` on `(q1, q2, p1, p2)`.
///
/// Nonnegative and normalised, with the product quantum marginals of
/// `Φ1 ⊗ Φ2` as its four two-variable projections.
pub fn product_density(phi1: &WaveFunction1D, phi2: &WaveFunction1D) -> RealField4D {
    let q1 = phi1.amplitudes().abs_sqr();
    let q2 = phi2.amplitudes().abs_sqr();
    let p1 = phi1.momentum().abs_sqr();
    let p2 = phi2.momentum().abs_sqr();
    let axes = [phi1.axis(), phi2.axis(), *p1.axis(0), *p2.axis(0)];
    let mut values = Vec::with_capacity(q1.len() * q2.len() * p1.len() * p2.len());
    for &a in q1.values() {
        for &b in q2.values() {
            for &c in p1.values() {
                values.extend(p2.values().iter().map(|&d| a * b * c * d));
            }
        }
    }
    Field::from_values(axes, values).expect("shape follows from the factors")
}
