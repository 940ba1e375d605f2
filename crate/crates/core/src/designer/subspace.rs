use nalgebra::Vector3;
use num_complex::Complex;

use crate::channel::{tx_focusing_jacobian, tx_focusing_vector, Target};
use crate::em::{OperatingPoint, PanelGeometry};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, Real};

/// `U_TX = [A_TX, A_TX,x, A_TX,y, A_TX,z]`, each group with one column per
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<T: Real> {
    pub matrix: CMatrix<T>,
    pub targets: usize,
}

impl<T: Real> SubspaceBasis<T> {
    pub fn columns(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn build_subspace<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
    targets: &[Target<T>],
) -> Result<SubspaceBasis<T>> {
    let u = targets.len();
    if u == 0 {
        return Err(Error::invalid("subspace needs at least one target"));
    }
    let mut matrix = CMatrix::zeros(panel.len(), 4 * u);
    for (i, t) in targets.iter().enumerate() {
        matrix.set_column(i, &tx_focusing_vector(op, panel, &t.position)?.values);
        let jac = tx_focusing_jacobian(op, panel, &t.position)?;
        for (a, col) in jac.iter().enumerate() {
            matrix.set_column((a + 1) * u + i, col);
        }
    }
    if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("subspace basis is not finite"));
    }
    Ok(SubspaceBasis { matrix, targets: u })
}

/// Largest relative deviation between the derivative columns and central
/// differences of the focusing vectors with the given step.
pub fn derivative_deviation<T: Real>(
    op: &OperatingPoint<T>,
    panel: &PanelGeometry<T>,
    targets: &[Target<T>],
    step: T,
) -> Result<T> {
    let basis = build_subspace(op, panel, targets)?;
    let u = targets.len();
    let mut worst = T::zero();
    for (i, t) in targets.iter().enumerate() {
        for a in 0..3 {
            let mut e = Vector3::zeros();
            e[a] = step;
            let plus = tx_focusing_vector(op, panel, &(t.position + e))?.values;
            let minus = tx_focusing_vector(op, panel, &(t.position - e))?.values;
            let fd = (plus - minus) / Complex::new(lit::<T>(2.0) * step, T::zero());
            let col = basis.matrix.column((a + 1) * u + i);
            let dev = (fd - col).norm() / col.norm();
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}
