//! Small dense helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Induced 1-norm (max absolute column sum).
pub fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + cabs(*z)))
        .fold(T::zero(), |m, v| if v > m { v } else { m })
}

pub fn vec_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

/// `x^H y`.
pub fn dotc<T: Real>(x: &CVector<T>, y: &CVector<T>) -> Complex<T> {
    x.iter().zip(y.iter()).fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b)
}

/// Largest singular value by power iteration on `A^H A`.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    let ah = a.adjoint();
    operator_norm(a.ncols(), |v| &ah * (a * v))
}

/// Largest singular value of an operator given `v -> A^H A v`.
pub fn operator_norm<T: Real>(n: usize, normal: impl Fn(&CVector<T>) -> CVector<T>) -> T {
    if n == 0 {
        return T::zero();
    }
    // deterministic, non-degenerate start vector
    let mut v = CVector::from_fn(n, |i, _| Complex::new(T::one(), lit::<T>(0.1 * (i % 7) as f64)));
    let nv = vec_norm(&v);
    v /= Complex::new(nv, T::zero());
    let mut sigma = T::zero();
    for _ in 0..1000 {
        let w = normal(&v);
        let nw = vec_norm(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let next = nw.sqrt();
        v = w / Complex::new(nw, T::zero());
        let done = (next - sigma).abs() <= lit::<T>(1e-13) * next;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

pub fn is_hermitian<T: Real>(m: &CMatrix<T>, tol: T) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.iter().fold(T::zero(), |s, z| s.max(cabs(*z)));
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| cabs(m[(i, j)] - m[(j, i)].conj()) <= tol * scale))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    let mut ev: Vec<T> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

/// Cholesky of a symmetric PSD matrix, rejecting pivots below
/// `rel_tol * max(diag)`.
pub fn psd_cholesky<T: Real>(m: &DMatrix<T>, rel_tol: T, what: &str) -> Result<Cholesky<T, Dyn>> {
    let n = m.nrows();
    let dmax = (0..n).fold(T::zero(), |s, i| s.max(m[(i, i)].abs()));
    if !(dmax > T::zero()) {
        return Err(Error::SingularMatrix(format!("{what} is zero")));
    }
    let chol = symmetrize(m)
        .cholesky()
        .ok_or_else(|| Error::SingularMatrix(format!("{what} is not positive definite")))?;
    let l = chol.l_dirty();
    for i in 0..n {
        if l[(i, i)] * l[(i, i)] < rel_tol * dmax {
            return Err(Error::SingularMatrix(format!(
                "{what} has a pivot below the relative tolerance at index {i}"
            )));
        }
    }
    Ok(chol)
}

/// LU factorization of a square complex matrix with solves against the
/// matrix and its adjoint.
pub struct ComplexLu<T: Real> {
    lu: LU<Complex<T>, Dyn, Dyn>,
    l_adj: CMatrix<T>,
    u_adj: CMatrix<T>,
    norm1: T,
}

impl<T: Real> ComplexLu<T> {
    pub fn new(a: &CMatrix<T>, what: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!("{what} is not square")));
        }
        let lu = a.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularMatrix(format!("{what} is singular")));
        }
        Ok(Self { l_adj: lu.l().adjoint(), u_adj: lu.u().adjoint(), norm1: one_norm(a), lu })
    }

    pub fn len(&self) -> usize {
        self.l_adj.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(&self, b: &CVector<T>) -> CVector<T> {
        self.lu.solve(b).expect("factor checked invertible")
    }

    /// Solves `A^H x = b`. With `P A = L U`, `A^H = U^H L^H P`.
    pub fn solve_adjoint(&self, b: &CVector<T>) -> CVector<T> {
        let w = self.u_adj.solve_lower_triangular(b).expect("factor checked invertible");
        let mut v = self.l_adj.solve_upper_triangular(&w).expect("unit diagonal");
        self.lu.p().inv_permute_rows(&mut v);
        v
    }

    /// `||A||_1 ||A^-1||_1` with the inverse norm estimated by Hager's
    /// method in Higham's refinement; a lower bound, usually within a small
    /// factor of the true value.
    pub fn condition_estimate(&self) -> T {
        self.norm1 * self.inverse_norm_estimate()
    }

    fn inverse_norm_estimate(&self) -> T {
        let n = self.len();
        if n == 0 {
            return T::zero();
        }
        let l1 = |v: &CVector<T>| v.iter().fold(T::zero(), |s, z| s + cabs(*z));
        let one = Complex::new(T::one(), T::zero());
        let mut x = CVector::from_element(n, one / Complex::new(lit(n as f64), T::zero()));
        let mut est = T::zero();
        for it in 0..5 {
            let y = self.solve(&x);
            let ny = l1(&y);
            if it > 0 && ny <= est {
                break;
            }
            est = ny;
            let xi = y.map(|z| {
                let a = cabs(z);
                if a > T::zero() { z / Complex::new(a, T::zero()) } else { one }
            });
            let z = self.solve_adjoint(&xi);
            let (jmax, zmax) = z.iter().enumerate().fold((0, T::zero()), |b, (i, v)| {
                if cabs(*v) > b.1 { (i, cabs(*v)) } else { b }
            });
            if it > 0 && zmax <= z.dotc(&x).re {
                break;
            }
            x = CVector::zeros(n);
            x[jmax] = one;
        }
        // alternating probe guards against unlucky cancellation
        let denom = lit::<T>((n.max(2) - 1) as f64);
        let alt = CVector::from_fn(n, |i, _| {
            let s = if i % 2 == 0 { T::one() } else { -T::one() };
            Complex::new(s * (T::one() + lit::<T>(i as f64) / denom), T::zero())
        });
        let alt_est = lit::<T>(2.0) * l1(&self.solve(&alt)) / lit(3.0 * n as f64);
        est.max(alt_est)
    }
}
