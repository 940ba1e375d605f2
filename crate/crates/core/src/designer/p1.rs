use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use super::sdp::{solve_sdp, BlockEntry, BlockSdp, SdpOptions, SdpStatus};
use super::SubspaceBasis;
use crate::channel::Scenario;
use crate::crb::{derivative_terms_with, effective_fim, DerivativeForm, FimBlocks};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigenvalues, CMatrix, CVector};
use crate::scalar::{cabs, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaStructure {
    /// Non-negative diagonal `Lambda`.
    #[default]
    Diagonal,
    /// Any Hermitian PSD `Lambda`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct P1Options {
    pub structure: LambdaStructure,
    pub sdp: SdpOptions,
}

/// Post-solve feasibility audit, each a relative violation (0 when met).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Residuals<T> {
    pub epigraph: T,
    pub schur: T,
    pub lambda: T,
    pub budget: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub relative_gap: T,
}

impl<T: Real> P1Residuals<T> {
    pub fn max_violation(&self) -> T {
        self.epigraph.max(self.schur).max(self.lambda).max(self.budget)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution<T: Real> {
    /// `Lambda` in the coordinates of the unnormalized basis.
    pub lambda: CMatrix<T>,
    /// `M_opt = U_TX Lambda U_TX^H`.
    pub covariance: CMatrix<T>,
    /// `F` with `F F^H = M_opt`.
    pub factor: CMatrix<T>,
    pub z: DMatrix<T>,
    pub v: DMatrix<T>,
    /// `sqrt(Tr{Z^-1})`, m.
    pub bound: T,
    /// `sqrt(Tr{V})`, m.
    pub epigraph_bound: T,
    pub budget: T,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: P1Residuals<T>,
}

fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn sym_unit<T: Real>(n: usize, i: usize, j: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = T::one();
    m[(j, i)] = T::one();
    m
}

fn embed<T: Real>(n: usize, offset: usize, inner: &DMatrix<T>) -> DMatrix<T> {
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((offset, offset), (inner.nrows(), inner.ncols())).copy_from(inner);
    m
}

fn min_eig_violation<T: Real>(m: &DMatrix<T>, scale: T) -> T {
    let lo = sym_eigenvalues(m)[0];
    (-lo / scale.max(T::one())).max(T::zero())
}

/// Hermitian square root factor `V diag(sqrt(max(ev, 0)))`.
fn psd_root<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let eig = m.clone().symmetric_eigen();
    let mut v = eig.eigenvectors;
    for (k, mut col) in v.column_iter_mut().enumerate() {
        col *= Complex::new(eig.eigenvalues[k].max(T::zero()).sqrt(), T::zero());
    }
    v
}

/// Solves the relaxed design `min Tr{Z^-1}` over `M = U_TX Lambda U_TX^H`
/// with `Tr{M} <= budget`, lifted to `min Tr{V}` with the epigraph LMI.
pub fn solve_p1<T: Real>(
    scenario: &Scenario<T>,
    basis: &SubspaceBasis<T>,
    budget: T,
    options: &P1Options,
) -> Result<SdpSolution<T>> {
    let u = scenario.num_targets();
    if basis.targets != u || basis.matrix.nrows() != scenario.num_elements() {
        return Err(Error::invalid("subspace basis does not match the scenario"));
    }
    if !(budget.is_finite() && budget > T::zero()) {
        return Err(Error::invalid("trace budget must be positive"));
    }
    let k_cols = basis.columns();
    let np = 3 * u;
    let nf = 5 * u;

    // normalized columns with ||u_k||^2 = budget
    let mut col_scale = Vec::with_capacity(k_cols);
    let mut unit = basis.matrix.clone();
    for (k, mut col) in unit.column_iter_mut().enumerate() {
        let nrm = col.norm();
        if !(nrm > T::zero()) {
            return Err(Error::domain(format!("subspace column {k} is zero")));
        }
        let s = budget.sqrt() / nrm;
        col *= Complex::new(s, T::zero());
        col_scale.push(s);
    }

    let c = scenario.fisher_scale();
    let terms = derivative_terms_with(scenario, DerivativeForm::Reduced)?;
    let w = &scenario.rx.combiner;
    // grads[k][i] = W^H D_i u_k
    let grads: Vec<Vec<CVector<T>>> = (0..k_cols)
        .map(|k| {
            let v = unit.column(k).into_owned();
            terms.iter().map(|d| w.adjoint() * d.apply(&v)).collect()
        })
        .collect();
    let cross = |l: usize, k: usize| -> DMatrix<Complex<T>> {
        DMatrix::from_fn(nf, nf, |i, j| grads[l][i].dotc(&grads[k][j]) * Complex::new(c, T::zero()))
    };

    // (J coefficient, trace coefficient) per Lambda parameter
    let mut lambda_params: Vec<(DMatrix<T>, T)> = Vec::new();
    let mut lambda_layout: Vec<(usize, usize, bool)> = Vec::new();
    match options.structure {
        LambdaStructure::Diagonal => {
            for k in 0..k_cols {
                lambda_params.push((cross(k, k).map(|z| z.re), T::one()));
                lambda_layout.push((k, k, false));
            }
        }
        LambdaStructure::Full => {
            for (k, l) in sym_pairs(k_cols) {
                let gamma = unit.column(l).dotc(&unit.column(k)) / Complex::new(budget, T::zero());
                if k == l {
                    lambda_params.push((cross(k, k).map(|z| z.re), T::one()));
                    lambda_layout.push((k, k, false));
                } else {
                    let h_lk = cross(l, k);
                    let h_kl = cross(k, l);
                    lambda_params.push(((&h_lk + &h_kl).map(|z| z.re), lit::<T>(2.0) * gamma.re));
                    lambda_layout.push((k, l, false));
                    lambda_params.push((h_kl.map(|z| z.im) - h_lk.map(|z| z.im), -lit::<T>(2.0) * gamma.im));
                    lambda_layout.push((k, l, true));
                }
            }
        }
    }

    // equilibrate at the uniform point Lambda = I / K
    let kf = lit::<T>(k_cols as f64);
    let mut j_ref = DMatrix::zeros(nf, nf);
    for (idx, &(k, l, imag)) in lambda_layout.iter().enumerate() {
        if k == l && !imag {
            j_ref += &lambda_params[idx].0 / kf;
        }
    }
    let mut s_beta = vec![T::one(); 2 * u];
    for (i, sb) in s_beta.iter_mut().enumerate() {
        let d = j_ref[(np + i, np + i)];
        if !(d > T::zero()) {
            return Err(Error::Unobservable { reason: "reflections carry no information".into(), condition: f64::INFINITY });
        }
        *sb = T::one() / d.sqrt();
    }
    // whiten the positions with E_ref^{-1/2}, E_ref the effective FIM at the
    // uniform point; Tr{Z^-1} becomes Tr{W Z_hat^-1} with W = T_p^2
    let e_ref = effective_fim(&FimBlocks::new(j_ref.clone(), u)?).unwrap_or_else(|_| j_ref.view((0, 0), (np, np)).into_owned());
    let eig = crate::linalg::symmetrize(&e_ref).symmetric_eigen();
    let e_max = eig.eigenvalues.iter().fold(T::zero(), |m, v| m.max(*v));
    if !(e_max > T::zero()) {
        return Err(Error::Unobservable { reason: "positions carry no information".into(), condition: f64::INFINITY });
    }
    let floor = e_max * lit(1e-14);
    let whiten = |pow: f64| {
        let d = DVector::from_iterator(np, eig.eigenvalues.iter().map(|&v| v.max(floor).powf(lit(pow))));
        &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
    };
    let t_p = whiten(-0.5);
    let t_p_inv = whiten(0.5);
    let weight = &t_p * &t_p;
    let w0 = (0..np).fold(T::zero(), |s, i| s + weight[(i, i)]) / lit(np as f64);
    let mut transform = DMatrix::zeros(nf, nf);
    transform.view_mut((0, 0), (np, np)).copy_from(&t_p);
    for i in 0..2 * u {
        transform[(np + i, np + i)] = s_beta[i];
    }
    let equilibrate = |m: &DMatrix<T>| crate::linalg::symmetrize(&(transform.transpose() * m * &transform));
    let lambda_params: Vec<(DMatrix<T>, T)> = lambda_params.iter().map(|(m, t)| (equilibrate(m), *t)).collect();

    // cone blocks: epigraph, Schur LMI, Lambda >= 0, budget
    let pairs = sym_pairs(np);
    let ns = pairs.len();
    let nl = lambda_params.len();
    let mut blocks = vec![2 * np, nf];
    let lambda_block_start = blocks.len();
    match options.structure {
        LambdaStructure::Diagonal => blocks.extend(std::iter::repeat_n(1, k_cols)),
        LambdaStructure::Full => blocks.push(2 * k_cols),
    }
    let budget_block = blocks.len();
    blocks.push(1);

    let mut c0 = DMatrix::zeros(2 * np, 2 * np);
    for i in 0..np {
        c0[(i, np + i)] = T::one();
        c0[(np + i, i)] = T::one();
    }
    let mut cmat: Vec<DMatrix<T>> = blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    cmat[0] = c0;
    cmat[budget_block][(0, 0)] = T::one();

    let mut a: Vec<Vec<BlockEntry<T>>> = Vec::with_capacity(2 * ns + nl);
    let mut b = Vec::with_capacity(2 * ns + nl);
    for &(i, j) in &pairs {
        a.push(vec![(0, -embed(2 * np, 0, &sym_unit(np, i, j)))]);
        let coeff = if i == j { weight[(i, i)] } else { lit::<T>(2.0) * weight[(i, j)] };
        b.push(-coeff / w0);
    }
    for &(i, j) in &pairs {
        let e = sym_unit::<T>(np, i, j);
        a.push(vec![(0, -embed(2 * np, np, &e)), (1, embed(nf, 0, &e))]);
        b.push(T::zero());
    }
    for (idx, (jm, tr)) in lambda_params.iter().enumerate() {
        let mut entry: Vec<BlockEntry<T>> = vec![(1, -jm.clone())];
        match options.structure {
            LambdaStructure::Diagonal => {
                entry.push((lambda_block_start + idx, DMatrix::from_element(1, 1, -T::one())));
            }
            LambdaStructure::Full => {
                let (k, l, imag) = lambda_layout[idx];
                let n2 = 2 * k_cols;
                let mut m = DMatrix::zeros(n2, n2);
                if imag {
                    // [[0, -F], [F, 0]] with F = e_k e_l^T - e_l e_k^T
                    m[(k, k_cols + l)] = T::one();
                    m[(l, k_cols + k)] = -T::one();
                    m[(k_cols + l, k)] = T::one();
                    m[(k_cols + k, l)] = -T::one();
                } else {
                    let e = sym_unit::<T>(k_cols, k, l);
                    m.view_mut((0, 0), (k_cols, k_cols)).copy_from(&e);
                    m.view_mut((k_cols, k_cols), (k_cols, k_cols)).copy_from(&e);
                }
                entry.push((lambda_block_start, -m));
            }
        }
        if *tr != T::zero() {
            entry.push((budget_block, DMatrix::from_element(1, 1, *tr)));
        }
        a.push(entry);
        b.push(T::zero());
    }
    let problem = BlockSdp { blocks, c: cmat, a, b: DVector::from_vec(b) };
    let out = solve_sdp(&problem, &options.sdp)?;
    match out.status {
        SdpStatus::Infeasible => return Err(Error::Solver("relaxed design is infeasible or unbounded".into())),
        SdpStatus::NumericalFailure => return Err(Error::Solver("interior-point method broke down".into())),
        _ => {}
    }

    let y = &out.y;
    let unpack = |offset: usize| {
        let mut m = DMatrix::zeros(np, np);
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            m[(i, j)] = y[offset + idx];
            m[(j, i)] = y[offset + idx];
        }
        m
    };
    let v_hat = unpack(0);
    let z_hat = unpack(ns);
    let mut lambda_hat = CMatrix::<T>::zeros(k_cols, k_cols);
    for (idx, &(k, l, imag)) in lambda_layout.iter().enumerate() {
        let val = y[2 * ns + idx];
        if imag {
            lambda_hat[(k, l)] += Complex::new(T::zero(), val);
            lambda_hat[(l, k)] -= Complex::new(T::zero(), val);
        } else {
            lambda_hat[(k, l)] += Complex::new(val, T::zero());
            if k != l {
                lambda_hat[(l, k)] += Complex::new(val, T::zero());
            }
        }
    }

    // audits on the equilibrated problem
    let slack = problem.slack(y);
    let j_lambda = lambda_params
        .iter()
        .enumerate()
        .fold(DMatrix::zeros(nf, nf), |acc, (idx, (jm, _))| acc + jm * y[2 * ns + idx]);
    let lambda_scale = lambda_hat.iter().fold(T::zero(), |s, z| s.max(cabs(*z)));
    let lambda_violation = match options.structure {
        LambdaStructure::Diagonal => (0..k_cols)
            .map(|k| if lambda_scale > T::zero() { (-lambda_hat[(k, k)].re / lambda_scale).max(T::zero()) } else { T::zero() })
            .fold(T::zero(), |a, b| a.max(b)),
        LambdaStructure::Full => min_eig_violation(&slack[lambda_block_start], lambda_scale),
    };
    let residuals = P1Residuals {
        epigraph: min_eig_violation(&slack[0], slack[0].norm()),
        schur: min_eig_violation(&slack[1], j_lambda.norm()),
        lambda: lambda_violation,
        budget: (-slack[budget_block][(0, 0)]).max(T::zero()),
        primal_infeasibility: out.primal_infeasibility,
        dual_infeasibility: out.dual_infeasibility,
        relative_gap: out.relative_gap,
    };

    let z = &t_p_inv * &z_hat * &t_p_inv;
    let v = &t_p * &v_hat * &t_p;
    let bound = z
        .clone()
        .cholesky()
        .map(|ch| {
            let inv = ch.inverse();
            (0..np).fold(T::zero(), |s, i| s + inv[(i, i)]).sqrt()
        })
        .unwrap_or(lit(f64::INFINITY));
    let epigraph_bound = (0..np).fold(T::zero(), |s, i| s + v[(i, i)]).max(T::zero()).sqrt();

    let root = match options.structure {
        LambdaStructure::Diagonal => CMatrix::from_diagonal(&DVector::from_fn(k_cols, |k, _| {
            Complex::new(lambda_hat[(k, k)].re.max(T::zero()).sqrt(), T::zero())
        })),
        LambdaStructure::Full => psd_root(&lambda_hat),
    };
    let factor = &unit * root;
    let covariance = &factor * factor.adjoint();
    let lambda = CMatrix::from_fn(k_cols, k_cols, |k, l| lambda_hat[(k, l)] * (col_scale[k] * col_scale[l]));
    Ok(SdpSolution {
        lambda,
        covariance,
        factor,
        z,
        v,
        bound,
        epigraph_bound,
        budget,
        status: out.status,
        iterations: out.iterations,
        residuals,
    })
}
