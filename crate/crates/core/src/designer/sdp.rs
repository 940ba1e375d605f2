//! Primal-dual interior-point solver for small block-diagonal SDPs in the
//! inequality form
//!
//! ```text
//! maximize b^T y   subject to   S = C - sum_i y_i A_i  >= 0
//! ```
//!
//! with symmetric blocks. Uses the HKM direction with Mehrotra
//! predictor-corrector steps from an infeasible start.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;
use crate::scalar::{lit, to_f64, Real};

/// One coefficient matrix restricted to a single block.
pub type BlockEntry<T> = (usize, DMatrix<T>);

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSdp<T: Real> {
    pub blocks: Vec<usize>,
    pub c: Vec<DMatrix<T>>,
    /// `a[i]` lists the non-zero blocks of `A_i`.
    pub a: Vec<Vec<BlockEntry<T>>>,
    pub b: DVector<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 100, step_fraction: 0.98, verbose: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpOutput<T: Real> {
    pub y: DVector<T>,
    pub x: Vec<DMatrix<T>>,
    pub s: Vec<DMatrix<T>>,
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_objective: T,
    pub dual_objective: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub relative_gap: T,
}

type Blocks<T> = Vec<DMatrix<T>>;
/// Merit, y, X, S, residual summary and iteration of the best iterate.
type Iterate<T> = (T, DVector<T>, Blocks<T>, Blocks<T>, (T, T, T, T, T), usize);

fn inner<T: Real>(x: &[DMatrix<T>], y: &[DMatrix<T>]) -> T {
    x.iter().zip(y).fold(T::zero(), |s, (a, b)| s + a.dot(b))
}

fn frob<T: Real>(x: &[DMatrix<T>]) -> T {
    inner(x, x).sqrt()
}

fn sym<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    (&m + m.transpose()) * lit::<T>(0.5)
}

impl<T: Real> BlockSdp<T> {
    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.blocks.len() {
            return Err(Error::invalid("one C block per cone block required"));
        }
        for (k, (c, &n)) in self.c.iter().zip(&self.blocks).enumerate() {
            if c.shape() != (n, n) {
                return Err(Error::invalid(format!("C block {k} has the wrong size")));
            }
        }
        if self.a.len() != self.b.len() {
            return Err(Error::invalid("one constraint matrix per dual variable required"));
        }
        for (i, ai) in self.a.iter().enumerate() {
            for (blk, m) in ai {
                if *blk >= self.blocks.len() || m.shape() != (self.blocks[*blk], self.blocks[*blk]) {
                    return Err(Error::invalid(format!("A_{i} references an invalid block")));
                }
            }
        }
        Ok(())
    }

    fn apply(&self, x: &[DMatrix<T>]) -> DVector<T> {
        DVector::from_iterator(
            self.a.len(),
            self.a.iter().map(|ai| ai.iter().fold(T::zero(), |s, (blk, m)| s + m.dot(&x[*blk]))),
        )
    }

    fn adjoint(&self, y: &DVector<T>) -> Blocks<T> {
        let mut out: Blocks<T> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            for (blk, m) in ai {
                out[*blk] += m * yi;
            }
        }
        out
    }

    /// `S = C - sum y_i A_i`.
    pub fn slack(&self, y: &DVector<T>) -> Blocks<T> {
        self.c.iter().zip(self.adjoint(y)).map(|(c, a)| c - a).collect()
    }

    fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }
}

/// Largest `alpha <= 1 / step_fraction` keeping `x + alpha dx` PSD.
fn max_step<T: Real>(x: &[DMatrix<T>], dx: &[DMatrix<T>]) -> Option<T> {
    let mut best = lit::<T>(f64::INFINITY);
    for (xb, db) in x.iter().zip(dx) {
        let l = xb.clone().cholesky()?.l();
        let linv = l.solve_lower_triangular(&DMatrix::identity(xb.nrows(), xb.nrows()))?;
        let m = sym(&linv * db * linv.transpose());
        let lo = sym_eigenvalues(&m)[0];
        if lo < T::zero() {
            best = best.min(-T::one() / lo);
        }
    }
    Some(best)
}

fn inverse_blocks<T: Real>(s: &[DMatrix<T>]) -> Option<Blocks<T>> {
    s.iter().map(|b| b.clone().cholesky().map(|c| sym(c.inverse()))).collect()
}

fn schur_matrix<T: Real>(p: &BlockSdp<T>, x: &[DMatrix<T>], sinv: &[DMatrix<T>]) -> DMatrix<T> {
    let m = p.a.len();
    let mut out = DMatrix::zeros(m, m);
    // column j: X A_j S^-1 per block, then contract with every A_i
    let mut by_block: Vec<Vec<(usize, &DMatrix<T>)>> = vec![Vec::new(); p.blocks.len()];
    for (i, ai) in p.a.iter().enumerate() {
        for (blk, mat) in ai {
            by_block[*blk].push((i, mat));
        }
    }
    for (j, aj) in p.a.iter().enumerate() {
        for (blk, mat) in aj {
            let w = &x[*blk] * mat * &sinv[*blk];
            for (i, ai) in &by_block[*blk] {
                if *i >= j {
                    out[(*i, j)] += ai.dot(&w);
                }
            }
        }
    }
    for j in 0..m {
        for i in j + 1..m {
            out[(j, i)] = out[(i, j)];
        }
    }
    out
}

struct Direction<T: Real> {
    dx: Blocks<T>,
    dy: DVector<T>,
    ds: Blocks<T>,
}

/// Solves with two steps of iterative refinement.
fn solve_schur<T: Real>(m: &DMatrix<T>, rhs: &DVector<T>) -> Option<DVector<T>> {
    let solve = |r: &DVector<T>| -> Option<DVector<T>> {
        match m.clone().cholesky() {
            Some(c) => Some(c.solve(r)),
            None => m.clone().lu().solve(r),
        }
    };
    let mut x = solve(rhs)?;
    for _ in 0..2 {
        let r = rhs - m * &x;
        x += solve(&r)?;
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Primal infeasibility accepted at termination. The duality gap and the
/// dual (LMI) residual are held to the full tolerance.
const PRIMAL_ACCEPT: f64 = 1e-6;
/// Iterations without merit improvement before giving up.
const STALL_LIMIT: usize = 6;

pub fn solve_sdp<T: Real>(problem: &BlockSdp<T>, options: &SdpOptions) -> Result<SdpOutput<T>> {
    problem.validate()?;
    let n = lit::<T>(problem.dim() as f64);
    let tol = lit::<T>(options.tolerance);
    let tau = lit::<T>(options.step_fraction);
    let norm_b = problem.b.norm();
    let norm_c = frob(&problem.c);

    let a_norms: Vec<T> = problem
        .a
        .iter()
        .map(|ai| ai.iter().fold(T::zero(), |s, (_, m)| s + m.norm_squared()).sqrt())
        .collect();
    let ten = lit::<T>(10.0);
    let mut xi = ten.max(n.sqrt());
    let mut eta = ten.max(n.sqrt()).max(norm_c);
    for (bi, an) in problem.b.iter().zip(&a_norms) {
        xi = xi.max((T::one() + bi.abs()) / (T::one() + *an));
        eta = eta.max(*an);
    }
    let mut x: Blocks<T> = problem.blocks.iter().map(|&k| DMatrix::identity(k, k) * xi).collect();
    let mut s: Blocks<T> = problem.blocks.iter().map(|&k| DMatrix::identity(k, k) * eta).collect();
    let mut y = DVector::zeros(problem.b.len());

    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut summary = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    let mut best: Option<Iterate<T>> = None;
    let mut stall = 0;
    for it in 0..=options.max_iterations {
        iterations = it;
        let rp = &problem.b - problem.apply(&x);
        let aty = problem.adjoint(&y);
        let rd: Blocks<T> = (0..problem.blocks.len()).map(|k| &problem.c[k] - &s[k] - &aty[k]).collect();
        let pobj = inner(&problem.c, &x);
        let dobj = problem.b.dot(&y);
        let pinf = rp.norm() / (T::one() + norm_b);
        let dinf = frob(&rd) / (T::one() + norm_c);
        let gap = (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs());
        summary = (pobj, dobj, pinf, dinf, gap);
        if options.verbose {
            eprintln!(
                "sdp {it:3} pobj {:+.6e} dobj {:+.6e} pinf {:.2e} dinf {:.2e} gap {:.2e}",
                to_f64(pobj),
                to_f64(dobj),
                to_f64(pinf),
                to_f64(dinf),
                to_f64(gap)
            );
        }
        if gap < tol && pinf < tol && dinf < tol {
            status = SdpStatus::Optimal;
            best = None;
            break;
        }
        let merit = gap.max(pinf).max(dinf);
        match &best {
            Some((m, ..)) if merit >= *m => stall += 1,
            _ => {
                best = Some((merit, y.clone(), x.clone(), s.clone(), summary, it));
                stall = 0;
            }
        }
        if stall >= STALL_LIMIT {
            break;
        }
        let big = lit::<T>(1e14);
        if y.norm() > big * (T::one() + norm_c) || frob(&x) > big * (T::one() + norm_b) {
            status = SdpStatus::Infeasible;
            break;
        }
        if it == options.max_iterations {
            break;
        }
        let mu = inner(&x, &s) / n;
        let Some(sinv) = inverse_blocks(&s) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let schur = schur_matrix(problem, &x, &sinv);
        let x_rd_sinv: Blocks<T> = (0..x.len()).map(|k| &x[k] * &rd[k] * &sinv[k]).collect();
        let base_rhs = &problem.b + problem.apply(&x_rd_sinv);
        let direction = |rhs: DVector<T>, sigma_mu: T, corr: Option<&Blocks<T>>| -> Option<Direction<T>> {
            let dy = solve_schur(&schur, &rhs)?;
            let at = problem.adjoint(&dy);
            let ds: Blocks<T> = (0..rd.len()).map(|k| &rd[k] - &at[k]).collect();
            let dx = (0..x.len())
                .map(|k| {
                    let mut d = &sinv[k] * sigma_mu - &x[k] - &x[k] * &ds[k] * &sinv[k];
                    if let Some(c) = corr {
                        d -= &c[k];
                    }
                    sym(d)
                })
                .collect();
            Some(Direction { dx, dy, ds })
        };
        let Some(pred) = direction(base_rhs.clone(), T::zero(), None) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &pred.dx), max_step(&s, &pred.ds)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let ap = T::one().min(tau * ap);
        let ad = T::one().min(tau * ad);
        let xa: Blocks<T> = (0..x.len()).map(|k| &x[k] + &pred.dx[k] * ap).collect();
        let sa: Blocks<T> = (0..s.len()).map(|k| &s[k] + &pred.ds[k] * ad).collect();
        let mu_aff = inner(&xa, &sa) / n;
        let ratio = (mu_aff / mu).max(T::zero()).min(T::one());
        let sigma = ratio * ratio * ratio;
        let corr: Blocks<T> = (0..x.len()).map(|k| &pred.dx[k] * &pred.ds[k] * &sinv[k]).collect();
        let sinv_vec: Blocks<T> = sinv.iter().map(|m| m * (sigma * mu)).collect();
        let rhs = &base_rhs - problem.apply(&sinv_vec) + problem.apply(&corr);
        let Some(step) = direction(rhs, sigma * mu, Some(&corr)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (Some(ap), Some(ad)) = (max_step(&x, &step.dx), max_step(&s, &step.ds)) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let ap = T::one().min(tau * ap);
        let ad = T::one().min(tau * ad);
        for k in 0..x.len() {
            x[k] += &step.dx[k] * ap;
            s[k] += &step.ds[k] * ad;
        }
        y += &step.dy * ad;
        if !(to_f64(frob(&x)).is_finite() && to_f64(y.norm()).is_finite()) {
            status = SdpStatus::NumericalFailure;
            break;
        }
    }
    if status != SdpStatus::Optimal && status != SdpStatus::Infeasible {
        if let Some((_, by, bx, bs, bsum, bit)) = best {
            let (_, _, pinf, dinf, gap) = bsum;
            if gap < tol && dinf < tol && pinf < lit(PRIMAL_ACCEPT) {
                status = SdpStatus::Optimal;
            }
            y = by;
            x = bx;
            s = bs;
            summary = bsum;
            iterations = bit;
        }
    }
    let (primal_objective, dual_objective, primal_infeasibility, dual_infeasibility, relative_gap) = summary;
    Ok(SdpOutput {
        y,
        x,
        s,
        status,
        iterations,
        primal_objective,
        dual_objective,
        primal_infeasibility,
        dual_infeasibility,
        relative_gap,
    })
}
