//! Non-negative least squares by block principal pivoting on the normal
//! equations, with a single-exchange fallback that guarantees termination.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T: Real> {
    pub x: DVector<T>,
    /// `Q x - c`, the gradient of the quadratic at `x`.
    pub gradient: DVector<T>,
    pub iterations: usize,
    /// Largest KKT violation relative to the gradient scale `max |c|`.
    pub kkt_violation: T,
}

impl<T: Real> NnlsSolution<T> {
    /// Indices held at the bound.
    pub fn active(&self) -> Vec<bool> {
        self.x.iter().map(|v| *v == T::zero()).collect()
    }
}

fn subsystem<T: Real>(q: &DMatrix<T>, c: &DVector<T>, free: &[usize]) -> Result<DVector<T>> {
    let k = free.len();
    let mut sub = DMatrix::from_fn(k, k, |i, j| q[(free[i], free[j])]);
    let rhs = DVector::from_fn(k, |i, _| c[free[i]]);
    if let Some(ch) = sub.clone().cholesky() {
        let mut x = ch.solve(&rhs);
        // one refinement step on the possibly ill-conditioned block
        let r = &rhs - &sub * &x;
        x += ch.solve(&r);
        return Ok(x);
    }
    // rank-deficient block: tiny ridge
    let dmax = (0..k).fold(T::zero(), |m, i| m.max(sub[(i, i)]));
    for i in 0..k {
        sub[(i, i)] += dmax * lit(1e-13);
    }
    sub.cholesky()
        .map(|ch| ch.solve(&rhs))
        .ok_or_else(|| Error::SingularMatrix("NNLS normal equations are not positive semidefinite".into()))
}

fn kkt<T: Real>(x: &DVector<T>, y: &DVector<T>, scale: T) -> T {
    let mut worst = T::zero();
    for (xi, yi) in x.iter().zip(y.iter()) {
        let v = if *xi > T::zero() { yi.abs() } else { (-*yi).max(T::zero()) };
        worst = worst.max(v);
    }
    worst / scale
}

/// Minimizes `x^T Q x / 2 - c^T x` over `x >= 0` for symmetric PSD `Q`.
pub fn nnls_quadratic<T: Real>(q: &DMatrix<T>, c: &DVector<T>) -> Result<NnlsSolution<T>> {
    let n = c.len();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::invalid("NNLS dimension mismatch"));
    }
    let scale = c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if n == 0 || scale == T::zero() {
        return Ok(NnlsSolution { x: DVector::zeros(n), gradient: -c.clone(), iterations: 0, kkt_violation: T::zero() });
    }
    let qscale = q.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut free = vec![false; n];
    let mut x = DVector::zeros(n);
    let mut best_infeasible = n + 1;
    let mut backup = 3;
    let max_iter = 10 * n + 100;
    for it in 0..max_iter {
        let idx: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
        x.fill(T::zero());
        if !idx.is_empty() {
            let xf = subsystem(q, c, &idx)?;
            for (k, &i) in idx.iter().enumerate() {
                x[i] = xf[k];
            }
        }
        let mut y = q * &x - c;
        let xmax = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let ytol = lit::<T>(1e-13) * (scale + qscale * xmax);
        let infeasible: Vec<usize> = (0..n)
            .filter(|&i| if free[i] { x[i] < T::zero() } else { y[i] < -ytol })
            .collect();
        if infeasible.is_empty() {
            for i in 0..n {
                if free[i] {
                    y[i] = T::zero();
                }
            }
            let kkt_violation = kkt(&x, &(q * &x - c), scale);
            return Ok(NnlsSolution { x, gradient: y, iterations: it + 1, kkt_violation });
        }
        if infeasible.len() < best_infeasible {
            best_infeasible = infeasible.len();
            backup = 3;
            for &i in &infeasible {
                free[i] = !free[i];
            }
        } else if backup > 0 {
            backup -= 1;
            for &i in &infeasible {
                free[i] = !free[i];
            }
        } else {
            let i = *infeasible.last().expect("non-empty");
            free[i] = !free[i];
        }
    }
    Err(Error::Solver(format!("NNLS did not terminate in {max_iter} iterations")))
}

/// Minimizes `||A x - b||` over `x >= 0`, with columns equilibrated before
/// forming the normal equations.
pub fn nnls<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<NnlsSolution<T>> {
    if a.nrows() != b.len() {
        return Err(Error::invalid("NNLS dimension mismatch"));
    }
    let norms: Vec<T> = a.column_iter().map(|c| c.norm()).collect();
    let d: Vec<T> = norms.iter().map(|&v| if v > T::zero() { T::one() / v } else { T::one() }).collect();
    let mut scaled = a.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[k];
    }
    let q = scaled.tr_mul(&scaled);
    let c = scaled.tr_mul(b);
    let mut sol = nnls_quadratic(&q, &c)?;
    for (k, dk) in d.iter().enumerate() {
        sol.x[k] *= *dk;
        sol.gradient[k] /= *dk;
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_interior() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let xs = DVector::from_vec(vec![2.0, 3.0]);
        let b = &a * &xs;
        let s = nnls(&a, &b).unwrap();
        assert!((s.x - xs).norm() < 1e-12);
        assert!(s.kkt_violation < 1e-12);
    }

    #[test]
    fn bound_becomes_active() {
        // unconstrained optimum at (1, -1)
        let a = DMatrix::<f64>::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let s = nnls(&a, &b).unwrap();
        assert_eq!(s.x[1], 0.0);
        assert!((s.x[0] - 1.0).abs() < 1e-14);
        assert!(s.gradient[1] > 0.0);
        assert_eq!(s.active(), vec![false, true]);
    }

    #[test]
    fn zero_rhs() {
        let a = DMatrix::<f64>::identity(3, 3);
        let s = nnls(&a, &DVector::zeros(3)).unwrap();
        assert_eq!(s.x, DVector::zeros(3));
    }

    #[test]
    fn matches_brute_force_on_small_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = DMatrix::from_fn(6, 3, |_, _| rng.random_range(-1.0..1.0));
            let b = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
            let s = nnls(&a, &b).unwrap();
            // enumerate every support and keep the best feasible solution
            let mut best = f64::INFINITY;
            for mask in 0u32..8 {
                let cols: Vec<usize> = (0..3).filter(|k| mask & (1 << k) != 0).collect();
                let mut x = DVector::zeros(3);
                if !cols.is_empty() {
                    let sub = DMatrix::from_fn(6, cols.len(), |i, j| a[(i, cols[j])]);
                    let xs = sub.clone().svd(true, true).solve(&b, 1e-14).unwrap();
                    if xs.iter().any(|v| *v < 0.0) {
                        continue;
                    }
                    for (k, &c) in cols.iter().enumerate() {
                        x[c] = xs[k];
                    }
                }
                best = best.min((&a * &x - &b).norm());
            }
            assert!((&a * &s.x - &b).norm() <= best + 1e-12);
            assert!(s.kkt_violation < 1e-10);
        }
    }
}
