//! Near-field focusing vectors and their target-position derivatives.
//!
//! TX entry `n` for a target at `p` (panel centre at the origin):
//!
//! ```text
//! a_n = -(k^2 eta / (2 pi R_c)) sin(theta_e) sin(theta_a) exp(+j k R_n)
//! ```
//!
//! with `sin(theta_e) = rho_n / R_n` and `sin(theta_a) = dy_n / rho_n`, so the
//! product is `dy_n / R_n` and the broadside case `rho_n = 0` is a regular
//! null. RX entry `m` is `exp(+j k B_m) / B_c` (isotropic antennas).

use nalgebra::Vector3;
use num_complex::Complex;

use super::RxArray;
use crate::em::{OperatingPoint, PanelGeometry};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::scalar::{cis, Real};

/// Distance and departure/arrival angles between one array element and a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusGeometry<T> {
    pub distance: T,
    /// `acos(dz / R)`.
    pub elevation: T,
    /// `atan2(dy, dx)`.
    pub azimuth: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocusingVector<T: Real> {
    pub values: CVector<T>,
    pub target: Vector3<T>,
    pub geometry: Vec<FocusGeometry<T>>,
    /// Distance from the array centre (`R_u` or `B_u`).
    pub center_distance: T,
}

fn geometry<T: Real>(delta: &Vector3<T>) -> FocusGeometry<T> {
    let distance = delta.norm();
    FocusGeometry {
        distance,
        elevation: (delta.z / distance).acos(),
        azimuth: delta.y.atan2(delta.x),
    }
}

fn tx_amplitude<T: Real>(op: &OperatingPoint<T>) -> T {
    let k = op.wavenumber;
    -(k * k * op.impedance) / T::two_pi()
}

fn embed<T: Real>(r: &nalgebra::Vector2<T>) -> Vector3<T> {
    Vector3::new(r.x, r.y, T::zero())
}

fn center_offset<T: Real>(panel: &PanelGeometry<T>, target: &Vector3<T>) -> Result<(Vector3<T>, T)> {
    let d = target - embed(&panel.center());
    let r = d.norm();
    if !(r > T::zero()) {
        return Err(Error::singular("target at the panel centre"));
    }
    Ok((d, r))
}

pub fn tx_focusing_vector<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
    target: &Vector3<T>,
) -> Result<FocusingVector<T>> {
    let (_, rc) = center_offset(panel, target)?;
    let k = op.wavenumber;
    let scale = tx_amplitude(op) / rc;
    let mut geo = Vec::with_capacity(panel.len());
    let mut values = CVector::zeros(panel.len());
    for (n, r) in panel.elements.iter().enumerate() {
        let d = target - embed(r);
        let rn = d.norm();
        if !(rn > T::zero()) {
            return Err(Error::singular(format!("target coincides with element {n}")));
        }
        geo.push(geometry(&d));
        values[n] = cis(k * rn) * (scale * d.y / rn);
    }
    Ok(FocusingVector { values, target: *target, geometry: geo, center_distance: rc })
}

/// `[d a / dx, d a / dy, d a / dz]` of the TX focusing vector.
pub fn tx_focusing_jacobian<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
    target: &Vector3<T>,
) -> Result<[CVector<T>; 3]> {
    let (dc, rc) = center_offset(panel, target)?;
    let k = op.wavenumber;
    let amp = tx_amplitude(op);
    let n_el = panel.len();
    let mut out = [CVector::zeros(n_el), CVector::zeros(n_el), CVector::zeros(n_el)];
    for (n, r) in panel.elements.iter().enumerate() {
        let d = target - embed(r);
        let rn = d.norm();
        if !(rn > T::zero()) {
            return Err(Error::singular(format!("target coincides with element {n}")));
        }
        let phase = cis(k * rn);
        let s = d.y / rn;
        for a in 0..3 {
            let ds = (if a == 1 { T::one() / rn } else { T::zero() }) - d.y * d[a] / (rn * rn * rn);
            let dinv_rc = -dc[a] / (rc * rc * rc);
            // d/dp_a [ s e^{jkR} / R_c ]
            let term = Complex::new(ds / rc + s * dinv_rc, s * k * d[a] / (rn * rc));
            out[a][n] = phase * term * amp;
        }
    }
    Ok(out)
}

pub fn rx_focusing_vector<T: Real>(op: &OperatingPoint<T>, rx: &RxArray<T>, target: &Vector3<T>) -> Result<FocusingVector<T>> {
    let bc = (target - rx.center).norm();
    if !(bc > T::zero()) {
        return Err(Error::singular("target at the receive array centre"));
    }
    let k = op.wavenumber;
    let mut geo = Vec::with_capacity(rx.len());
    let mut values = CVector::zeros(rx.len());
    for (m, a) in rx.antennas.iter().enumerate() {
        let d = target - a;
        let bm = d.norm();
        if !(bm > T::zero()) {
            return Err(Error::singular(format!("target coincides with receive antenna {m}")));
        }
        geo.push(geometry(&d));
        values[m] = cis(k * bm) / Complex::new(bc, T::zero());
    }
    Ok(FocusingVector { values, target: *target, geometry: geo, center_distance: bc })
}

pub fn rx_focusing_jacobian<T: Real>(op: &OperatingPoint<T>, rx: &RxArray<T>, target: &Vector3<T>) -> Result<[CVector<T>; 3]> {
    let dc = target - rx.center;
    let bc = dc.norm();
    if !(bc > T::zero()) {
        return Err(Error::singular("target at the receive array centre"));
    }
    let k = op.wavenumber;
    let m_ant = rx.len();
    let mut out = [CVector::zeros(m_ant), CVector::zeros(m_ant), CVector::zeros(m_ant)];
    for (m, ant) in rx.antennas.iter().enumerate() {
        let d = target - ant;
        let bm = d.norm();
        if !(bm > T::zero()) {
            return Err(Error::singular(format!("target coincides with receive antenna {m}")));
        }
        let phase = cis(k * bm);
        for a in 0..3 {
            let term = Complex::new(-dc[a] / (bc * bc * bc), k * d[a] / (bm * bc));
            out[a][m] = phase * term;
        }
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use nalgebra::Vector2;

    use super::*;

    fn setup(elements: Vec<Vector2<f64>>) -> (OperatingPoint<f64>, PanelGeometry<f64>) {
        let op = OperatingPoint::new(20e9).unwrap();
        let lam = op.wavelength;
        let panel = PanelGeometry::new(0.5, 0.5, lam / 5.0, elements, Vector2::new(0.1, 0.1), 0.0).unwrap();
        (op, panel)
    }

    #[test]
    fn broadside_entry_is_null() {
        let (op, panel) = setup(vec![Vector2::zeros(), Vector2::new(0.01, 0.02)]);
        let a = tx_focusing_vector(&op, &panel, &Vector3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(a.values[0], Complex::new(0.0, 0.0));
        assert!(a.values[1].norm() > 0.0);
    }

    #[test]
    fn trigonometric_oracle() {
        let (op, panel) = setup(vec![Vector2::zeros()]);
        let p = Vector3::new(1.0, 1.0, 1.0);
        let a = tx_focusing_vector(&op, &panel, &p).unwrap();
        let k = op.wavenumber;
        let r = 3f64.sqrt();
        let theta_e = (1.0 / r).acos();
        let theta_a = (1.0f64).atan2(1.0);
        let mag = k * k * op.impedance * theta_e.sin() * theta_a.sin() / (2.0 * std::f64::consts::PI * r);
        assert!((a.values[0].norm() - mag).abs() < 1e-12 * mag);
        // outgoing-wave phase convention: +kR in a, -kR in a^H
        let phase = (a.values[0] / Complex::new(-mag, 0.0)).arg();
        let expected = Complex::from_polar(1.0, k * r).arg();
        assert!((phase - expected).abs() < 1e-9);
        assert!((a.geometry[0].distance - r).abs() < 1e-15);
    }

    #[test]
    fn mirrored_target_keeps_magnitude() {
        let (op, panel) = setup(vec![Vector2::new(0.05, -0.02)]);
        let r = panel.elements[0];
        let p = Vector3::new(r.x + 0.7, r.y + 1.3, 2.0);
        let q = Vector3::new(r.x - 0.7, r.y + 1.3, 2.0);
        let a = tx_focusing_vector(&op, &panel, &p).unwrap();
        let b = tx_focusing_vector(&op, &panel, &q).unwrap();
        // same |sin theta_a|, same R_n; R_c differs, so compare the R_c-free part
        let na = a.values[0].norm() * a.center_distance;
        let nb = b.values[0].norm() * b.center_distance;
        assert!((na - nb).abs() < 1e-12 * na);
    }

    #[test]
    fn rx_vector_properties() {
        let op = OperatingPoint::<f64>::new(20e9).unwrap();
        let rx1 = RxArray::uniform_line(Vector3::new(10.0, 5.0, 5.0), 1, op.wavelength, Vector3::y()).unwrap();
        let p = Vector3::new(5.4, 5.3, 4.0);
        let b = (p - rx1.center).norm();
        let a = rx_focusing_vector(&op, &rx1, &p).unwrap();
        let expected = Complex::from_polar(1.0 / b, op.wavenumber * b);
        assert!((a.values[0] - expected).norm() < 1e-12 * expected.norm());

        let rx = RxArray::uniform_line(Vector3::new(10.0, 5.0, 5.0), 4, op.wavelength, Vector3::y()).unwrap();
        let broadside = Vector3::new(6.0, 5.0, 2.0);
        let a = rx_focusing_vector(&op, &rx, &broadside).unwrap();
        assert!((a.values[0] - a.values[3]).norm() < 1e-9 * a.values[0].norm());
        assert!((a.values[1] - a.values[2]).norm() < 1e-9 * a.values[1].norm());
    }

    #[test]
    fn rx_distance_doubling() {
        let op = OperatingPoint::<f64>::new(20e9).unwrap();
        let rx = RxArray::uniform_line(Vector3::zeros(), 3, op.wavelength, Vector3::y()).unwrap();
        // scale the whole geometry about the array centre: target and antennas
        let p = Vector3::new(3.0, 1.0, 2.0);
        let a = rx_focusing_vector(&op, &rx, &p).unwrap();
        let mut rx2 = rx.clone();
        for ant in &mut rx2.antennas {
            *ant *= 2.0;
        }
        let b = rx_focusing_vector(&op, &rx2, &(p * 2.0)).unwrap();
        for m in 0..3 {
            assert!((b.values[m].norm() - 0.5 * a.values[m].norm()).abs() < 1e-14);
            let bm = a.geometry[m].distance;
            let advance = (b.values[m] / a.values[m]).arg();
            let expected = Complex::from_polar(1.0, op.wavenumber * bm).arg();
            assert!((advance - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobians_match_central_differences() {
        let (op, panel) = setup(vec![Vector2::new(0.03, -0.04), Vector2::new(-0.1, 0.2), Vector2::new(0.0, 0.0)]);
        let rx = RxArray::uniform_line(Vector3::new(10.0, 5.0, 5.0), 3, op.wavelength, Vector3::y()).unwrap();
        let p = Vector3::new(5.4, 5.3, 4.0);
        let h = 1e-4 * op.wavelength;
        let jt = tx_focusing_jacobian(&op, &panel, &p).unwrap();
        let jr = rx_focusing_jacobian(&op, &rx, &p).unwrap();
        for a in 0..3 {
            let mut e = Vector3::zeros();
            e[a] = h;
            let fd_t = (tx_focusing_vector(&op, &panel, &(p + e)).unwrap().values
                - tx_focusing_vector(&op, &panel, &(p - e)).unwrap().values)
                / Complex::new(2.0 * h, 0.0);
            let fd_r = (rx_focusing_vector(&op, &rx, &(p + e)).unwrap().values
                - rx_focusing_vector(&op, &rx, &(p - e)).unwrap().values)
                / Complex::new(2.0 * h, 0.0);
            assert!((&fd_t - &jt[a]).norm() <= 1e-6 * jt[a].norm(), "tx axis {a}");
            assert!((&fd_r - &jr[a]).norm() <= 1e-6 * jr[a].norm(), "rx axis {a}");
        }
    }
}
