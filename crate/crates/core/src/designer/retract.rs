//! Retraction of a moment vector onto per-element resonance strengths.
//!
//! At resonance `1/alpha_n = j Gamma_n x_n / w` with `x_n = 1/F_n`, and the
//! passivity bound reads `x_n >= C w / Gamma_n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::nnls::nnls_quadratic;
use crate::em::{solve_dipoles_exact, PolarizabilityVector, DEFAULT_CONDITION_CAP};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, CMatrix, CVector};
use crate::scalar::{cis, lit, Real};

/// Smallest strength returned, relative to the per-element limit.
pub const STRENGTH_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetractionModel {
    /// Two-term expansion `-(G^-1 + G^-1 diag(alpha)^-1 G^-1) h_f`, linear
    /// in `x`; valid when `||G^-1 diag(alpha)^-1|| < 1`.
    #[default]
    Neumann,
    /// `m_n = alpha_n H_loc,n` with the local field frozen between exact
    /// re-solves; each update is an element-wise clipped fit.
    LocalField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetractionOptions {
    pub model: RetractionModel,
    /// Also fit the global phase of the target, which the relaxation leaves
    /// arbitrary.
    pub align_phase: bool,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for RetractionOptions {
    fn default() -> Self {
        Self { model: RetractionModel::Neumann, align_phase: true, max_iterations: 30, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retraction<T: Real> {
    pub strengths: Vec<T>,
    pub inverse_strengths: Vec<T>,
    /// Phase applied to the target moments.
    pub phase: T,
    /// `||m_model - m_opt e^{j phase}||` under the retraction model.
    pub residual: T,
    /// Relative KKT violation of the final bound-constrained subproblem.
    pub kkt_violation: T,
    /// Elements pinned at the passivity limit.
    pub active: Vec<bool>,
    pub iterations: usize,
    pub model: RetractionModel,
}

/// Problem data shared by both models.
pub struct RetractionProblem<'a, T: Real> {
    pub target: &'a CVector<T>,
    pub coupling: &'a CMatrix<T>,
    pub excitation: &'a CVector<T>,
    pub damping: &'a [T],
    pub omega: T,
    /// Passivity constant `C`.
    pub passivity: T,
}

impl<T: Real> RetractionProblem<'_, T> {
    fn validate(&self) -> Result<()> {
        let n = self.target.len();
        if self.coupling.nrows() != n || self.coupling.ncols() != n || self.excitation.len() != n || self.damping.len() != n {
            return Err(Error::invalid("retraction dimensions do not match"));
        }
        if !(self.omega > T::zero() && self.passivity > T::zero()) {
            return Err(Error::invalid("frequency and passivity constant must be positive"));
        }
        if self.damping.iter().any(|g| !(*g > T::zero())) {
            return Err(Error::invalid("damping must be positive"));
        }
        Ok(())
    }

    /// `Gamma_n / (C w)`, the same expression as the passivity module.
    fn limits(&self) -> Vec<T> {
        self.damping.iter().map(|&g| g / (self.passivity * self.omega)).collect()
    }
}

/// Least-squares fit of the resonance strengths to `m_opt`.
pub fn retract_p2<T: Real>(problem: &RetractionProblem<'_, T>, options: &RetractionOptions) -> Result<Retraction<T>> {
    problem.validate()?;
    match options.model {
        RetractionModel::Neumann => neumann(problem, options),
        RetractionModel::LocalField => local_field(problem, options),
    }
}

fn stack<T: Real>(m: &CMatrix<T>) -> DMatrix<T> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, c, |i, j| if i < r { m[(i, j)].re } else { m[(i - r, j)].im })
}

fn stack_vec<T: Real>(v: &CVector<T>) -> DVector<T> {
    let r = v.len();
    DVector::from_fn(2 * r, |i, _| if i < r { v[i].re } else { v[i - r].im })
}

fn finish<T: Real>(x: &[T], limits: &[T]) -> Vec<T> {
    x.iter()
        .zip(limits)
        .map(|(&xi, &fmax)| (T::one() / xi).min(fmax).max(fmax * lit(STRENGTH_FLOOR)))
        .collect()
}

fn neumann<T: Real>(p: &RetractionProblem<'_, T>, options: &RetractionOptions) -> Result<Retraction<T>> {
    let n = p.target.len();
    let ginv = p
        .coupling
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::SingularMatrix("coupling matrix is singular".into()))?;
    let g = &ginv * p.excitation;
    let limits = p.limits();
    let lower: Vec<T> = limits.iter().map(|f| T::one() / *f).collect();
    // model m(x) = -g - A x with A = G^-1 diag(j Gamma g / w); x = L (1 + y)
    let mut a = ginv;
    for (k, mut col) in a.column_iter_mut().enumerate() {
        col *= Complex::new(T::zero(), p.damping[k] / p.omega) * g[k];
    }
    let al = &a * DVector::from_fn(n, |k, _| Complex::new(lower[k], T::zero()));
    let mut scaled = a.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex::new(lower[k], T::zero());
    }
    let real = stack(&scaled);
    let norms: Vec<T> = real.column_iter().map(|c| c.norm()).collect();
    let d: Vec<T> = norms.iter().map(|&v| if v > T::zero() { T::one() / v } else { T::one() }).collect();
    let mut eq = real;
    for (k, mut col) in eq.column_iter_mut().enumerate() {
        col *= d[k];
    }
    let q = eq.tr_mul(&eq);
    let base = -(&g + &al);

    let model = |y: &DVector<T>| -> CVector<T> {
        let x = DVector::from_fn(n, |k, _| Complex::new(lower[k] * (T::one() + y[k]), T::zero()));
        -(&g + &a * x)
    };
    let solve_for = |phase: T| -> Result<(DVector<T>, T)> {
        let b = stack_vec(&(&base - p.target * cis(phase)));
        let c = eq.tr_mul(&b);
        let s = nnls_quadratic(&q, &c)?;
        let y = DVector::from_fn(n, |k, _| s.x[k] * d[k]);
        Ok((y, s.kkt_violation))
    };

    let tnorm = vec_norm(p.target);
    let starts: Vec<T> = if options.align_phase && tnorm > T::zero() {
        (0..4).map(|i| T::frac_pi_2() * lit(i as f64)).collect()
    } else {
        vec![T::zero()]
    };
    let mut best: Option<(T, T, DVector<T>, T, usize)> = None;
    for start in starts {
        let mut phase = start;
        let mut iterations = 0;
        let (mut y, mut kkt) = solve_for(phase)?;
        let mut res = vec_norm(&(model(&y) - p.target * cis(phase)));
        if options.align_phase && tnorm > T::zero() {
            for _ in 0..options.max_iterations {
                iterations += 1;
                let overlap = p.target.dotc(&model(&y));
                let next = overlap.im.atan2(overlap.re);
                let (y2, kkt2) = solve_for(next)?;
                let res2 = vec_norm(&(model(&y2) - p.target * cis(next)));
                let done = res - res2 <= lit::<T>(options.tolerance) * (tnorm + res);
                if res2 <= res {
                    phase = next;
                    y = y2;
                    kkt = kkt2;
                    res = res2;
                }
                if done {
                    break;
                }
            }
        }
        if best.as_ref().is_none_or(|b| res < b.0) {
            best = Some((res, phase, y, kkt, iterations));
        }
    }
    let (residual, phase, y, kkt_violation, iterations) = best.expect("at least one start");
    let x: Vec<T> = (0..n).map(|k| lower[k] * (T::one() + y[k])).collect();
    Ok(Retraction {
        strengths: finish(&x, &limits),
        active: y.iter().map(|v| *v == T::zero()).collect(),
        inverse_strengths: x,
        phase,
        residual,
        kkt_violation,
        iterations,
        model: RetractionModel::Neumann,
    })
}

fn exact_moments<T: Real>(p: &RetractionProblem<'_, T>, f: &[T]) -> Result<CVector<T>> {
    let alpha = PolarizabilityVector::resonant(f, p.omega, p.damping)?;
    Ok(solve_dipoles_exact(p.coupling, &alpha, p.excitation, lit(DEFAULT_CONDITION_CAP))?.moments)
}

/// Element-wise clipped fit of `c_n F_n` to `t_n e^{j phi}` with the best
/// phase from a grid refined by alternation.
fn clipped_fit<T: Real>(coef: &CVector<T>, target: &CVector<T>, limits: &[T], align: bool) -> (Vec<T>, T) {
    let fit = |phase: T| -> (Vec<T>, T) {
        let rot = cis(phase);
        let mut err = T::zero();
        let f: Vec<T> = (0..coef.len())
            .map(|n| {
                let t = target[n] * rot;
                let c2 = coef[n].norm_sqr();
                let fmax = limits[n];
                let v = if c2 > T::zero() { (coef[n].conj() * t).re / c2 } else { fmax };
                let v = v.min(fmax).max(fmax * lit(STRENGTH_FLOOR));
                err += (t - coef[n] * v).norm_sqr();
                v
            })
            .collect();
        (f, err)
    };
    if !align {
        return (fit(T::zero()).0, T::zero());
    }
    let grid = 32;
    let mut phase = (0..grid)
        .map(|i| T::two_pi() * lit(i as f64 / grid as f64))
        .map(|ph| (ph, fit(ph).1))
        .fold((T::zero(), lit::<T>(f64::INFINITY)), |b, c| if c.1 < b.1 { c } else { b })
        .0;
    let (mut f, mut err) = fit(phase);
    for _ in 0..50 {
        let overlap = (0..coef.len()).fold(Complex::new(T::zero(), T::zero()), |s, n| s + target[n].conj() * coef[n] * f[n]);
        let next = overlap.im.atan2(overlap.re);
        let (f2, err2) = fit(next);
        if !(err2 < err * (T::one() - lit(1e-12))) {
            break;
        }
        phase = next;
        f = f2;
        err = err2;
    }
    (f, phase)
}

fn local_field<T: Real>(p: &RetractionProblem<'_, T>, options: &RetractionOptions) -> Result<Retraction<T>> {
    let limits = p.limits();
    let mut f = limits.clone();
    let mut m = exact_moments(p, &f)?;
    let objective = |m: &CVector<T>, phase: T| vec_norm(&(m - p.target * cis(phase)));
    let mut best: Option<(T, T, Vec<T>)> = None;
    let mut iterations = 0;
    let tnorm = vec_norm(p.target);
    for _ in 0..options.max_iterations.max(1) {
        iterations += 1;
        let coef = CVector::from_fn(f.len(), |n, _| m[n] / Complex::new(f[n], T::zero()));
        let (f_next, phase) = clipped_fit(&coef, p.target, &limits, options.align_phase);
        let m_next = exact_moments(p, &f_next)?;
        let res = objective(&m_next, phase);
        let improved = best.as_ref().is_none_or(|b| res < b.0);
        let gain = best.as_ref().map_or(lit(f64::INFINITY), |b| b.0 - res);
        if improved {
            best = Some((res, phase, f_next.clone()));
        }
        f = f_next;
        m = m_next;
        if !improved || gain <= lit::<T>(options.tolerance) * tnorm {
            break;
        }
    }
    let (residual, phase, strengths) = best.expect("at least one iteration");
    let inverse_strengths = strengths.iter().map(|v| T::one() / *v).collect();
    Ok(Retraction {
        active: strengths.iter().zip(&limits).map(|(a, b)| a == b).collect(),
        strengths,
        inverse_strengths,
        phase,
        residual,
        kkt_violation: T::zero(),
        iterations,
        model: RetractionModel::LocalField,
    })
}
