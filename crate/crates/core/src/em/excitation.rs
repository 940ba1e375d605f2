use nalgebra::DVector;
use num_complex::Complex;

use super::{OperatingPoint, PanelGeometry};
use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, Real};
use crate::specfun::{cylinder, CylinderOrder};

/// Feed-to-element coupling `h_f`; the excitation field is `h_f * I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationVector<T: Real> {
    pub hf: DVector<Complex<T>>,
    pub current: Complex<T>,
}

impl<T: Real> ExcitationVector<T> {
    pub fn field(&self) -> DVector<Complex<T>> {
        self.hf.map(|h| h * self.current)
    }
}

/// `[h_f]_n = (j k / 4) H1(k |r_n - p|) (p_y - r_yn) / |r_n - p|` for a line
/// source at `p` with unit current.
pub fn excitation_vector<T: Real>(op: &OperatingPoint<T>, panel: &PanelGeometry<T>) -> Result<ExcitationVector<T>> {
    let k = op.wavenumber;
    let quarter_k = k / lit(4.0);
    let mut hf = DVector::zeros(panel.len());
    for (n, r) in panel.elements.iter().enumerate() {
        let d = (panel.feed - r).norm();
        if !(d > T::zero()) {
            return Err(Error::singular(format!("element {n} coincides with the feed")));
        }
        let sine = (panel.feed.y - r.y) / d;
        let h1 = cylinder(k * d)?.hankel2(CylinderOrder::One);
        // j * (re + j im) = -im + j re
        hf[n] = Complex::new(-h1.im, h1.re) * (quarter_k * sine);
    }
    Ok(ExcitationVector { hf, current: Complex::new(T::one(), T::zero()) })
}

/// Upper bound `(k/4) |H1(k d_n)|` on each `|[h_f]_n|`.
pub fn excitation_envelope<T: Real>(op: &OperatingPoint<T>, panel: &PanelGeometry<T>) -> Result<Vec<T>> {
    let k = op.wavenumber;
    panel
        .elements
        .iter()
        .map(|r| {
            let d = (panel.feed - r).norm();
            Ok(k / lit(4.0) * cabs(cylinder(k * d)?.hankel2(CylinderOrder::One)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use nalgebra::Vector2;

    use super::*;
    use crate::specfun::hankel2;

    fn setup(elements: Vec<Vector2<f64>>) -> (OperatingPoint<f64>, PanelGeometry<f64>) {
        let op = OperatingPoint::new(20e9).unwrap();
        let lam = op.wavelength;
        let p = PanelGeometry::new(0.5, 0.5, lam / 5.0, elements, Vector2::zeros(), lam / 4.0).unwrap();
        (op, p)
    }

    #[test]
    fn axis_geometries() {
        let d = 0.02;
        let (op, p) = setup(vec![Vector2::new(0.0, d), Vector2::new(d, 0.0)]);
        let hf = excitation_vector(&op, &p).unwrap().hf;
        let k = op.wavenumber;
        let expected = -(Complex::new(0.0, k / 4.0) * hankel2(CylinderOrder::One, k * d).unwrap());
        assert!((hf[0] - expected).norm() < 1e-13 * expected.norm());
        assert_eq!(hf[1], Complex::new(0.0, 0.0));
    }

    #[test]
    fn magnitude_decays_along_y() {
        let op = OperatingPoint::<f64>::new(20e9).unwrap();
        let lam = op.wavelength;
        let els = [0.5, 1.0, 2.0, 4.0].iter().map(|m| Vector2::new(0.0, m * lam)).collect();
        let (op, p) = setup(els);
        let hf = excitation_vector(&op, &p).unwrap().hf;
        let env = excitation_envelope(&op, &p).unwrap();
        for n in 0..4 {
            assert!(hf[n].norm() <= env[n] * (1.0 + 1e-14));
        }
        assert!((1..4).all(|n| hf[n].norm() < hf[n - 1].norm()));
    }
}
