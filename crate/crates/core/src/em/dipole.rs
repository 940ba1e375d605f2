use nalgebra::DVector;
use num_complex::Complex;

use super::PolarizabilityVector;
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, vec_norm, CMatrix, ComplexLu, CVector};
use crate::scalar::{cabs, to_f64, Real};

/// Default cap on the 1-norm condition number of a dipole system.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveKind {
    Exact,
    /// Two-term expansion in `diag(alpha)^-1`.
    Neumann,
}

/// Dipole moments per unit feed current.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSolution<T: Real> {
    pub moments: CVector<T>,
    pub kind: SolveKind,
    /// Estimated 1-norm condition number of the (row-equilibrated) matrix
    /// that was factored.
    pub condition: T,
    /// `||G^-1 diag(alpha)^-1||_2` for the Neumann solve.
    pub contraction: Option<T>,
}

impl<T: Real> DipoleSolution<T> {
    /// The expansion is only meaningful when the contraction is below one.
    pub fn is_contractive(&self) -> bool {
        self.contraction.is_none_or(|q| q < T::one())
    }
}

fn check_dims<T: Real>(g: &CMatrix<T>, alpha: &PolarizabilityVector<T>, hf: &CVector<T>) -> Result<()> {
    let n = g.nrows();
    if !g.is_square() || alpha.len() != n || hf.len() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: G {}x{}, alpha {}, h_f {}",
            g.nrows(),
            g.ncols(),
            alpha.len(),
            hf.len()
        )));
    }
    alpha.validate()
}

/// Solves `(diag(alpha)^-1 - G) m = h_f`.
pub fn solve_dipoles_exact<T: Real>(
    g: &CMatrix<T>,
    alpha: &PolarizabilityVector<T>,
    hf: &CVector<T>,
    condition_cap: T,
) -> Result<DipoleSolution<T>> {
    check_dims(g, alpha, hf)?;
    let mut a = -g.clone();
    for (n, inv) in alpha.inverse().into_iter().enumerate() {
        a[(n, n)] += inv;
    }
    // row equilibration leaves the solution unchanged and keeps widely
    // spread polarizabilities from inflating the condition estimate
    let mut rhs = hf.clone();
    for (n, mut row) in a.row_iter_mut().enumerate() {
        let s = row.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
        if s > T::zero() {
            row /= Complex::new(s, T::zero());
            rhs[n] /= Complex::new(s, T::zero());
        }
    }
    let lu = ComplexLu::new(&a, "dipole system")?;
    let condition = checked_condition(&lu, condition_cap)?;
    let mut m = lu.solve(&rhs);
    // one step of iterative refinement
    let r = &rhs - &a * &m;
    m += lu.solve(&r);
    Ok(DipoleSolution { moments: m, kind: SolveKind::Exact, condition, contraction: None })
}

fn checked_condition<T: Real>(lu: &ComplexLu<T>, cap: T) -> Result<T> {
    let condition = lu.condition_estimate();
    if !condition.is_finite() {
        return Err(Error::SingularMatrix("system is numerically singular".into()));
    }
    if condition > cap {
        return Err(Error::IllConditioned { condition: to_f64(condition), cap: to_f64(cap) });
    }
    Ok(condition)
}

fn scale<T: Real>(v: &CVector<T>, d: &[Complex<T>]) -> CVector<T> {
    DVector::from_iterator(v.len(), v.iter().zip(d).map(|(x, a)| x * a))
}

/// `||G^-1 diag(d)||_2` from a factorization of `G`.
pub fn contraction<T: Real>(g: &ComplexLu<T>, d: &[Complex<T>]) -> T {
    let dc: Vec<Complex<T>> = d.iter().map(|z| z.conj()).collect();
    operator_norm(d.len(), |v| scale(&g.solve_adjoint(&g.solve(&scale(v, d))), &dc))
}

/// `m ~ -(G^-1 + G^-1 diag(alpha)^-1 G^-1) h_f`. Always returns the truncated
/// series; callers check [`DipoleSolution::is_contractive`].
pub fn solve_dipoles_neumann<T: Real>(
    g: &CMatrix<T>,
    alpha: &PolarizabilityVector<T>,
    hf: &CVector<T>,
    condition_cap: T,
) -> Result<DipoleSolution<T>> {
    check_dims(g, alpha, hf)?;
    let lu = ComplexLu::new(g, "coupling matrix")?;
    let condition = checked_condition(&lu, condition_cap)?;
    let inv_alpha = alpha.inverse();
    let first = lu.solve(hf);
    let moments = -(&first + lu.solve(&scale(&first, &inv_alpha)));
    let q = contraction(&lu, &inv_alpha);
    Ok(DipoleSolution { moments, kind: SolveKind::Neumann, condition, contraction: Some(q) })
}

/// `||(diag(alpha)^-1 - G) m - h_f||`.
pub fn residual_norm<T: Real>(g: &CMatrix<T>, alpha: &PolarizabilityVector<T>, hf: &CVector<T>, m: &CVector<T>) -> T {
    let mut r = -(g * m) - hf;
    for (n, inv) in alpha.inverse().into_iter().enumerate() {
        r[n] += inv * m[n];
    }
    vec_norm(&r)
}

/// Relative error bound of the two-term truncation for contraction `q < 1`,
/// `q^2 (1 + q) / (1 - q)`.
pub fn neumann_error_bound<T: Real>(q: T) -> T {
    q * q * (T::one() + q) / (T::one() - q)
}
