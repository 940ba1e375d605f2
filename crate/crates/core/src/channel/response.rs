use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{FocusingVector, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{lit, Real};

/// `H_R = sum_u beta_u a_RX(p_u) a_TX(p_u)^H`, size `M x N`.
pub fn round_trip_channel<T: Real>(
    tx: &[FocusingVector<T>],
    rx: &[FocusingVector<T>],
    betas: &[Complex<T>],
) -> CMatrix<T> {
    assert!(tx.len() == rx.len() && tx.len() == betas.len(), "one TX/RX vector and reflection per target");
    let m = rx.first().map_or(0, |v| v.values.len());
    let n = tx.first().map_or(0, |v| v.values.len());
    let mut h = DMatrix::zeros(m, n);
    for ((a_t, a_r), &b) in tx.iter().zip(rx).zip(betas) {
        h += (&a_r.values * b) * a_t.values.adjoint();
    }
    h
}

/// `mu = W^H H_R m`.
pub fn mean_response<T: Real>(w: &CMatrix<T>, h: &CMatrix<T>, m: &CVector<T>) -> CVector<T> {
    w.adjoint() * (h * m)
}

/// One pilot batch `Y = mu i^T + N`, pilots `sqrt(P_TX)`, noise entries
/// `CN(0, sigma^2)` drawn from a ChaCha stream keyed by `seed`.
pub fn simulate_received<T: Real>(scenario: &Scenario<T>, m: &CVector<T>, seed: u64) -> Result<CMatrix<T>> {
    if m.len() != scenario.num_elements() {
        return Err(Error::invalid("moment vector length does not match the panel"));
    }
    let h = scenario.round_trip()?;
    let mu = mean_response(&scenario.rx.combiner, &h, m);
    let pilot = scenario.pilot_power.sqrt();
    let sd = (scenario.noise_variance / lit(2.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = scenario.pilots;
    let mut y = DMatrix::zeros(mu.len(), t);
    // column-major fill keeps the draw order fixed
    for col in 0..t {
        for row in 0..mu.len() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            y[(row, col)] = mu[row] * pilot + Complex::new(lit::<T>(re) * sd, lit::<T>(im) * sd);
        }
    }
    Ok(y)
}
