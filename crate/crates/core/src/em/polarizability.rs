use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lorentzian resonance of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianParams<T> {
    /// Resonance strength `F` (dimensionless).
    pub strength: T,
    /// Resonance angular frequency, rad/s.
    pub resonance: T,
    /// Damping factor, rad/s.
    pub damping: T,
}

impl<T: Real> LorentzianParams<T> {
    pub fn new(strength: T, resonance: T, damping: T) -> Result<Self> {
        for (name, v) in [("strength", strength), ("resonance", resonance), ("damping", damping)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(format!("Lorentzian {name} must be positive, got {v}")));
            }
        }
        Ok(Self { strength, resonance, damping })
    }

    /// `F w^2 / (w0^2 - w^2 + j Gamma w)`.
    pub fn polarizability(&self, omega: T) -> Complex<T> {
        polarizability_lorentzian(self, omega)
    }
}

pub fn polarizability_lorentzian<T: Real>(params: &LorentzianParams<T>, omega: T) -> Complex<T> {
    let w2 = omega * omega;
    let den = Complex::new(params.resonance * params.resonance - w2, params.damping * omega);
    Complex::new(params.strength * w2, T::zero()) / den
}

/// Per-element magnetic polarizabilities `alpha_n`, m^3.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizabilityVector<T>(pub Vec<Complex<T>>);

impl<T: Real> PolarizabilityVector<T> {
    pub fn from_lorentzian(params: &[LorentzianParams<T>], omega: T) -> Self {
        Self(params.iter().map(|p| p.polarizability(omega)).collect())
    }

    /// At resonance `alpha_n = -j F_n w0 / Gamma_n`.
    pub fn resonant(strengths: &[T], omega: T, damping: &[T]) -> Result<Self> {
        if strengths.len() != damping.len() {
            return Err(Error::invalid("strength and damping lengths differ"));
        }
        let v = strengths
            .iter()
            .zip(damping)
            .map(|(&f, &g)| Complex::new(T::zero(), -f * omega / g))
            .collect();
        let alpha = Self(v);
        alpha.validate()?;
        Ok(alpha)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (n, a) in self.0.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) || (a.re == T::zero() && a.im == T::zero()) {
                return Err(Error::invalid(format!("polarizability {n} is zero or not finite")));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Vec<Complex<T>> {
        self.0.iter().map(|a| a.inv()).collect()
    }
}
