use nalgebra::DMatrix;

use super::fim::FimFactor;
use super::FimBlocks;
use crate::error::{Error, Result};
use crate::linalg::{psd_cholesky, sym_eigenvalues, symmetrize};
use crate::scalar::{lit, to_f64, Real};

/// Relative pivot tolerance for the PSD factorizations (on squared pivots).
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PebValue<T> {
    /// Position error bound, m.
    pub peb: T,
    /// Eigenvalue ratio of the equilibrated effective FIM.
    pub condition: T,
    pub valid: bool,
}

fn unobservable(reason: impl Into<String>, condition: f64) -> Error {
    Error::Unobservable { reason: reason.into(), condition }
}

/// Equilibrated effective position FIM `E_hat` and the per-coordinate
/// scaling `d` with `E = diag(d)^-1 E_hat diag(d)^-1`, plus the overall
/// scalar factor.
struct Effective<T: Real> {
    e_hat: DMatrix<T>,
    d: Vec<T>,
    scale: T,
    /// Upper-triangular `R` with `E_hat = R^T R` when available.
    r: Option<DMatrix<T>>,
}

fn from_matrix<T: Real>(blocks: &FimBlocks<T>) -> Result<Effective<T>> {
    let j = &blocks.matrix;
    let n = j.nrows();
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let v = j[(i, i)];
        if !(v.is_finite() && v > T::zero()) {
            return Err(unobservable(format!("parameter {i} carries no information"), f64::INFINITY));
        }
        d.push(T::one() / v.sqrt());
    }
    let scaled = DMatrix::from_fn(n, n, |a, b| j[(a, b)] * d[a] * d[b]);
    let p = 3 * blocks.targets;
    let b = 2 * blocks.targets;
    let jpp = scaled.view((0, 0), (p, p)).into_owned();
    let jpb = scaled.view((0, p), (p, b)).into_owned();
    let jbb = scaled.view((p, p), (b, b)).into_owned();
    let chol = psd_cholesky(&jbb, lit(PIVOT_TOLERANCE), "reflection FIM block")
        .map_err(|e| unobservable(format!("reflection block: {e}"), f64::INFINITY))?;
    let x = chol.solve(&jpb.transpose());
    Ok(Effective { e_hat: symmetrize(&(jpp - &jpb * x)), d: d[..p].to_vec(), scale: T::one(), r: None })
}

/// QR of the factor with the reflection columns first: the trailing
/// triangle is the Cholesky factor of the Schur complement.
fn from_factor<T: Real>(f: &FimFactor<T>, targets: usize) -> Result<Effective<T>> {
    let p = 3 * targets;
    let b = 2 * targets;
    let g = &f.rows;
    if g.nrows() < p + b {
        return Err(unobservable(
            format!("{} real observations for {} parameters", g.nrows(), p + b),
            f64::INFINITY,
        ));
    }
    let order: Vec<usize> = (p..p + b).chain(0..p).collect();
    let mut norms = Vec::with_capacity(p + b);
    for &c in &order {
        let nrm = g.column(c).norm();
        if !(nrm.is_finite() && nrm > T::zero()) {
            return Err(unobservable(format!("parameter {c} carries no information"), f64::INFINITY));
        }
        norms.push(nrm);
    }
    let gs = DMatrix::from_fn(g.nrows(), p + b, |r, c| g[(r, order[c])] / norms[c]);
    let r = gs.qr().r();
    let tol = lit::<T>(PIVOT_TOLERANCE).sqrt();
    for i in 0..b {
        if r[(i, i)].abs() < tol {
            return Err(unobservable("reflection block is singular", f64::INFINITY));
        }
    }
    let rpp = r.view((b, b), (p, p)).into_owned();
    let e_hat = rpp.transpose() * &rpp;
    let d = norms[b..].iter().map(|&v| T::one() / v).collect();
    Ok(Effective { e_hat, d, scale: f.scale, r: Some(rpp) })
}

fn effective<T: Real>(blocks: &FimBlocks<T>) -> Result<Effective<T>> {
    match &blocks.factor {
        Some(f) => from_factor(f, blocks.targets),
        None => from_matrix(blocks),
    }
}

/// Effective position FIM after eliminating the reflections.
pub fn effective_fim<T: Real>(blocks: &FimBlocks<T>) -> Result<DMatrix<T>> {
    let eff = effective(blocks)?;
    let n = eff.e_hat.nrows();
    Ok(DMatrix::from_fn(n, n, |a, b| eff.e_hat[(a, b)] * eff.scale / (eff.d[a] * eff.d[b])))
}

/// `sqrt(Tr{(J_pp - J_pb J_bb^-1 J_bp)^-1})`.
pub fn peb<T: Real>(blocks: &FimBlocks<T>) -> Result<PebValue<T>> {
    let eff = effective(blocks)?;
    let ev = sym_eigenvalues(&eff.e_hat);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let condition = if lo > T::zero() { hi / lo } else { lit(f64::INFINITY) };
    let n = eff.e_hat.nrows();
    let inv_diag: Vec<T> = match &eff.r {
        Some(r) => {
            let tol = lit::<T>(PIVOT_TOLERANCE).sqrt();
            if (0..n).any(|i| r[(i, i)].abs() < tol) {
                return Err(unobservable("effective position FIM is singular", to_f64(condition)));
            }
            let rinv = r
                .clone()
                .solve_upper_triangular(&DMatrix::identity(n, n))
                .ok_or_else(|| unobservable("effective position FIM is singular", to_f64(condition)))?;
            (0..n).map(|i| rinv.row(i).norm_squared()).collect()
        }
        None => {
            let chol = psd_cholesky(&eff.e_hat, lit(PIVOT_TOLERANCE), "effective position FIM")
                .map_err(|err| unobservable(format!("effective FIM: {err}"), to_f64(condition)))?;
            let inv = chol.inverse();
            (0..n).map(|i| inv[(i, i)]).collect()
        }
    };
    let trace = (0..n).fold(T::zero(), |s, i| s + inv_diag[i] * eff.d[i] * eff.d[i]);
    if !(trace.is_finite() && trace > T::zero()) {
        return Err(unobservable("non-positive bound", to_f64(condition)));
    }
    Ok(PebValue { peb: (trace / eff.scale).sqrt(), condition, valid: condition < lit(1.0 / PIVOT_TOLERANCE) })
}
