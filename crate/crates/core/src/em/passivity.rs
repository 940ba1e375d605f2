//! Power balance of a single magnetic dipole inside the parallel-plate guide.
//!
//! Supplied power `-(w mu0 / 2) Im{alpha} |H|^2` must not fall below the
//! radiated power `(w mu0 / 2) |alpha|^2 |H|^2 C` with
//! `C = k^3 / (3 pi) + k^2 / (8 h)`, the magnitudes of the imaginary parts of
//! the free-space and waveguide self terms. For a lossy element
//! (`Im{alpha} < 0`) this is `Im{1/alpha} >= C`.

use num_complex::Complex;

use super::OperatingPoint;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::scalar::{cabs, lit, Real};

/// Relative slack allowed when comparing radiated and supplied power.
pub const PASSIVITY_TOLERANCE: f64 = 1e-9;

/// `C = k^3 / (3 pi) + k^2 / (8 h)`, m^-3.
pub fn passivity_limit<T: Real>(op: &OperatingPoint<T>, height: T) -> T {
    let k = op.wavenumber;
    k * k * k / (lit::<T>(3.0) * T::pi()) + k * k / (lit::<T>(8.0) * height)
}

/// Largest resonance strength allowed at resonance, `Gamma / (C w)`.
pub fn max_strength<T: Real>(op: &OperatingPoint<T>, height: T, damping: T) -> T {
    damping / (passivity_limit(op, height) * op.omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAudit<T> {
    pub local_field: Complex<T>,
    pub supplied: T,
    pub radiated: T,
}

impl<T: Real> PowerAudit<T> {
    pub fn margin(&self) -> T {
        self.supplied - self.radiated
    }

    /// `P_rad / P_sup`; zero when no power flows.
    pub fn ratio(&self) -> T {
        if self.supplied == T::zero() && self.radiated == T::zero() {
            T::zero()
        } else {
            self.radiated / self.supplied
        }
    }

    pub fn passes(&self) -> bool {
        self.radiated <= self.supplied + lit::<T>(PASSIVITY_TOLERANCE) * self.supplied.abs()
    }
}

pub fn power_audit<T: Real>(op: &OperatingPoint<T>, height: T, alpha: Complex<T>, local_field: Complex<T>) -> PowerAudit<T> {
    let half = op.omega * op.mu0 / lit(2.0);
    let h2 = local_field.norm_sqr();
    PowerAudit {
        local_field,
        supplied: -half * alpha.im * h2,
        radiated: half * alpha.norm_sqr() * h2 * passivity_limit(op, height),
    }
}

/// Audits every element of a solved array. The local field follows from the
/// constitutive relation `m_n = alpha_n H_loc,n`.
pub fn audit_array<T: Real>(
    op: &OperatingPoint<T>,
    height: T,
    alpha: &[Complex<T>],
    moments: &CVector<T>,
) -> Result<Vec<PowerAudit<T>>> {
    if alpha.len() != moments.len() {
        return Err(Error::invalid("alpha and moment lengths differ"));
    }
    alpha
        .iter()
        .zip(moments.iter())
        .map(|(a, m)| {
            if cabs(*a) == T::zero() {
                return Err(Error::invalid("zero polarizability"));
            }
            Ok(power_audit(op, height, *a, m / a))
        })
        .collect()
}
