use nalgebra::DMatrix;
use num_complex::Complex;

use super::derivatives::{derivative_terms_with, DerivativeForm};
use crate::channel::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, CMatrix, CVector};
use crate::scalar::{lit, Real};

/// Real factor `G` with `scale * G^T G` congruent to the FIM through a
/// transform that only adds reflection columns to position columns, so the
/// position Schur complement is identical. Lets the bound be computed by
/// QR without squaring the large reflection-parallel components.
#[derive(Debug, Clone, PartialEq)]
pub struct FimFactor<T: Real> {
    pub rows: DMatrix<T>,
    pub scale: T,
}

/// Location-parameter FIM; see the module docs for the ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct FimBlocks<T: Real> {
    pub matrix: DMatrix<T>,
    pub targets: usize,
    pub factor: Option<FimFactor<T>>,
}

impl<T: Real> FimBlocks<T> {
    pub fn new(matrix: DMatrix<T>, targets: usize) -> Result<Self> {
        if matrix.shape() != (5 * targets, 5 * targets) {
            return Err(Error::invalid(format!(
                "FIM must be {0}x{0} for {targets} targets",
                5 * targets
            )));
        }
        Ok(Self { matrix, targets, factor: None })
    }

    pub fn with_factor(mut self, factor: FimFactor<T>) -> Result<Self> {
        if factor.rows.ncols() != 5 * self.targets {
            return Err(Error::invalid("FIM factor has the wrong column count"));
        }
        self.factor = Some(factor);
        Ok(self)
    }

    pub fn pp(&self) -> DMatrix<T> {
        let p = 3 * self.targets;
        self.matrix.view((0, 0), (p, p)).into_owned()
    }

    pub fn p_beta(&self) -> DMatrix<T> {
        let p = 3 * self.targets;
        self.matrix.view((0, p), (p, 2 * self.targets)).into_owned()
    }

    pub fn beta_beta(&self) -> DMatrix<T> {
        let p = 3 * self.targets;
        let b = 2 * self.targets;
        self.matrix.view((p, p), (b, b)).into_owned()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            matrix: &self.matrix * factor,
            targets: self.targets,
            factor: self.factor.as_ref().map(|f| FimFactor { rows: f.rows.clone(), scale: f.scale * factor }),
        }
    }
}

/// Stacks `[Re g; Im g]` of complex gradients into real rows.
pub(crate) fn real_rows<T: Real>(grads: &[CVector<T>], weight: T) -> DMatrix<T> {
    let m = grads.first().map_or(0, |g| g.len());
    DMatrix::from_fn(2 * m, grads.len(), |r, c| {
        let z = grads[c][r % m];
        weight * if r < m { z.re } else { z.im }
    })
}

fn gram<T: Real>(grads: &[CVector<T>], c: T) -> DMatrix<T> {
    let p = grads.len();
    let mut j = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let v = grads[a].dotc(&grads[b]).re * c;
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    j
}

fn gradients<T: Real>(scenario: &Scenario<T>, m: &CVector<T>, form: DerivativeForm) -> Result<Vec<CVector<T>>> {
    let w = &scenario.rx.combiner;
    Ok(derivative_terms_with(scenario, form)?
        .iter()
        .map(|d| w.adjoint() * d.apply(m))
        .collect())
}

/// `J~_ij = (2 T P_TX / sigma^2) Re{ dmu_i^H dmu_j }` with
/// `dmu_i = W^H D_i m`.
pub fn location_fim<T: Real>(scenario: &Scenario<T>, m: &CVector<T>) -> Result<FimBlocks<T>> {
    if m.len() != scenario.num_elements() {
        return Err(Error::invalid("moment vector length does not match the panel"));
    }
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("moment vector is not finite"));
    }
    let c = scenario.fisher_scale();
    let full = gradients(scenario, m, DerivativeForm::Full)?;
    let reduced = gradients(scenario, m, DerivativeForm::ReducedRankOne)?;
    FimBlocks::new(gram(&full, c), scenario.num_targets())?
        .with_factor(FimFactor { rows: real_rows(&reduced, T::one()), scale: c })
}

/// FIM as a linear function of the moment covariance `M`:
/// `J~_ij = c Re Tr{D_i^H W W^H D_j M}`.
pub fn fim_linear_in_m<T: Real>(scenario: &Scenario<T>, cov: &CMatrix<T>) -> Result<FimBlocks<T>> {
    let n = scenario.num_elements();
    if cov.shape() != (n, n) {
        return Err(Error::invalid("covariance size does not match the panel"));
    }
    if !is_hermitian(cov, lit(1e-10)) {
        return Err(Error::domain("moment covariance is not Hermitian"));
    }
    let w = &scenario.rx.combiner;
    let proj = w * w.adjoint();
    let terms = derivative_terms_with(scenario, DerivativeForm::Full)?;
    // per parameter: (P l_k, M r_k) alongside (l_k, r_k)
    let pre: Vec<Vec<(CVector<T>, CVector<T>)>> = terms
        .iter()
        .map(|d| d.terms.iter().map(|(l, r)| (&proj * l, cov * r)).collect())
        .collect();
    let c = scenario.fisher_scale();
    let p = terms.len();
    let mut j = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, (l_k, _)) in terms[a].terms.iter().enumerate() {
                let m_rk = &pre[a][k].1;
                for (l, (_, r_l)) in terms[b].terms.iter().enumerate() {
                    let p_ll = &pre[b][l].0;
                    acc += l_k.dotc(p_ll) * r_l.dotc(m_rk);
                }
            }
            let v = acc.re * c;
            j[(a, b)] = v;
            j[(b, a)] = v;
        }
    }
    let blocks = FimBlocks::new(j, scenario.num_targets())?;
    match covariance_factor(scenario, cov)? {
        Some(rows) => blocks.with_factor(FimFactor { rows, scale: c }),
        None => Ok(blocks),
    }
}

/// Stacked reduced gradients over the eigenvectors of a PSD covariance;
/// `None` when the covariance is indefinite.
fn covariance_factor<T: Real>(scenario: &Scenario<T>, cov: &CMatrix<T>) -> Result<Option<DMatrix<T>>> {
    let herm = (cov + cov.adjoint()) * Complex::new(lit::<T>(0.5), T::zero());
    let eig = herm.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if top == T::zero() {
        return Ok(None);
    }
    if eig.eigenvalues.iter().any(|&v| v < -lit::<T>(1e-10) * top) {
        return Ok(None);
    }
    let terms = derivative_terms_with(scenario, DerivativeForm::Reduced)?;
    let w = &scenario.rx.combiner;
    let mut blocks = Vec::new();
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= lit::<T>(1e-14) * top {
            continue;
        }
        let v = eig.eigenvectors.column(i).into_owned();
        let grads: Vec<CVector<T>> = terms.iter().map(|d| w.adjoint() * d.apply(&v)).collect();
        blocks.push(real_rows(&grads, lam.sqrt()));
    }
    let cols = 5 * scenario.num_targets();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        out.view_mut((r0, 0), (b.nrows(), cols)).copy_from(&b);
        r0 += b.nrows();
    }
    Ok(Some(out))
}
