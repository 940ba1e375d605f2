use nalgebra::DVector;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SdpSolution;
use crate::channel::Scenario;
use crate::crb::{location_fim, peb};
use crate::error::{Error, Result};
use crate::linalg::{vec_norm, CVector};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionMode {
    /// Principal eigenpair of `M_opt`.
    #[default]
    RankOne,
    /// One circular Gaussian draw with covariance `M_opt`.
    Sample,
}

/// Number of draws ranked by [`best_sample`] unless stated otherwise.
pub const DEFAULT_SAMPLE_DRAWS: usize = 8;

fn rescale<T: Real>(mut m: CVector<T>, budget: T) -> CVector<T> {
    let norm2 = m.norm_squared();
    if norm2 > budget {
        m *= Complex::new((budget / norm2).sqrt(), T::zero());
    }
    m
}

fn draw<T: Real>(sol: &SdpSolution<T>, rng: &mut ChaCha8Rng) -> CVector<T> {
    let k = sol.factor.ncols();
    let half = lit::<f64>(0.5).sqrt();
    let w = DVector::from_fn(k, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(lit::<T>(re * half), lit::<T>(im * half))
    });
    &sol.factor * w
}

/// Moment vector from the relaxed covariance, with `||m||^2 <= budget`.
/// The rank-one mode works on the small Gram matrix of the factor.
pub fn extract_moments<T: Real>(sol: &SdpSolution<T>, mode: ExtractionMode, seed: u64) -> Result<CVector<T>> {
    let scale = sol.factor.iter().fold(T::zero(), |m, z| m.max(z.norm_sqr()));
    if !(scale > T::zero()) {
        return Err(Error::domain("relaxed covariance is zero"));
    }
    let m = match mode {
        ExtractionMode::RankOne => {
            let gram = sol.factor.adjoint() * &sol.factor;
            let eig = gram.symmetric_eigen();
            let (top, lmax) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .fold((0, T::zero()), |(bi, bv), (i, v)| if *v > bv { (i, *v) } else { (bi, bv) });
            if !(lmax > T::zero()) {
                return Err(Error::domain("relaxed covariance is zero"));
            }
            // u = F w / sqrt(l) and m = sqrt(l) u = F w
            let mut m = &sol.factor * eig.eigenvectors.column(top);
            // fix the global phase: largest entry real positive
            let (_, pivot) = m.iter().fold((T::zero(), Complex::new(T::one(), T::zero())), |(bm, bz), z| {
                if z.norm_sqr() > bm { (z.norm_sqr(), *z) } else { (bm, bz) }
            });
            m *= pivot.conj() / Complex::new(crate::scalar::cabs(pivot), T::zero());
            m
        }
        ExtractionMode::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            draw(sol, &mut rng)
        }
    };
    Ok(rescale(m, sol.budget))
}

/// Best of `draws` Gaussian samples by position error bound, each scaled to
/// the full budget before ranking.
pub fn best_sample<T: Real>(scenario: &Scenario<T>, sol: &SdpSolution<T>, seed: u64, draws: usize) -> Result<CVector<T>> {
    if draws == 0 {
        return Err(Error::invalid("at least one draw is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(T, CVector<T>)> = None;
    for _ in 0..draws {
        let mut m = draw(sol, &mut rng);
        let nrm = vec_norm(&m);
        if !(nrm > T::zero()) {
            continue;
        }
        m *= Complex::new(sol.budget.sqrt() / nrm, T::zero());
        let value = match location_fim(scenario, &m).and_then(|f| peb(&f)) {
            Ok(v) => v.peb,
            Err(_) => continue,
        };
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, m));
        }
    }
    best.map(|(_, m)| m).ok_or_else(|| Error::domain("no sampled moment vector is observable"))
}
