use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use super::{green::green_total, OperatingPoint, PanelGeometry};
use crate::error::Result;
use crate::scalar::Real;

/// Interaction matrix between element dipoles, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    pub g: DMatrix<Complex<T>>,
    /// Pair distances `rho_nj`, m.
    pub distance: DMatrix<T>,
    /// Pair azimuths `psi_nj = atan2(dy, dx)` of `r_n - r_j`, rad.
    pub azimuth: DMatrix<T>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn len(&self) -> usize {
        self.g.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.g.nrows() == 0
    }
}

fn row_entries<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
    n: usize,
) -> Result<Vec<Complex<T>>> {
    let rn = panel.elements[n];
    panel.elements[n + 1..]
        .iter()
        .map(|rj| green_total(op, panel.height, &(rn - rj)))
        .collect()
}

fn assemble<T: Real>(panel: &PanelGeometry<T>, upper: Vec<Vec<Complex<T>>>) -> CouplingMatrix<T> {
    let n = panel.len();
    let mut g = DMatrix::zeros(n, n);
    let mut distance = DMatrix::zeros(n, n);
    let mut azimuth = DMatrix::zeros(n, n);
    for (a, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let b = a + 1 + off;
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let d = panel.elements[a] - panel.elements[b];
                distance[(a, b)] = d.norm();
                azimuth[(a, b)] = d.y.atan2(d.x);
            }
        }
    }
    CouplingMatrix { g, distance, azimuth }
}

/// Assembles `G` with rows evaluated in parallel. Each entry is computed
/// once (upper triangle) and mirrored, so the result is exactly symmetric
/// and independent of the thread count.
pub fn build_coupling_matrix<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
) -> Result<CouplingMatrix<T>> {
    let upper = (0..panel.len())
        .into_par_iter()
        .map(|n| row_entries(op, panel, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(panel, upper))
}

/// Single-threaded reference assembly.
pub fn build_coupling_matrix_serial<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
) -> Result<CouplingMatrix<T>> {
    let upper = (0..panel.len())
        .map(|n| row_entries(op, panel, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(panel, upper))
}

#[cfg(test)]
mod tests {
    use nalgebra::Vector2;

    use super::*;
    use crate::em::green::{green_fs, green_wg};

    fn panel(elements: Vec<Vector2<f64>>, lambda: f64) -> PanelGeometry<f64> {
        PanelGeometry::new(0.5, 0.5, lambda / 5.0, elements, Vector2::zeros(), lambda / 4.0).unwrap()
    }

    #[test]
    fn single_element_is_zero() {
        let op = OperatingPoint::new(20e9).unwrap();
        let p = panel(vec![Vector2::new(0.0, 0.01)], op.wavelength);
        let g = build_coupling_matrix(&op, &p).unwrap();
        assert_eq!(g.g.shape(), (1, 1));
        assert_eq!(g.g[(0, 0)], Complex::new(0.0, 0.0));
    }

    #[test]
    fn pair_matches_kernel_sum() {
        let op = OperatingPoint::new(20e9).unwrap();
        let lam = op.wavelength;
        let a = Vector2::new(-lam / 4.0, 0.02);
        let b = Vector2::new(lam / 4.0, 0.02);
        let p = panel(vec![a, b], lam);
        let g = build_coupling_matrix(&op, &p).unwrap();
        let d = a - b;
        let expected = green_wg(&op, p.height, &d).unwrap() + green_fs(&op, &d).unwrap();
        assert_eq!(g.g[(0, 1)], expected);
        assert_eq!(g.g[(1, 0)], expected);
        assert!((g.distance[(0, 1)] - lam / 2.0).abs() < 1e-15);
        assert!((g.azimuth[(0, 1)] - std::f64::consts::PI).abs() < 1e-15);
    }
}
