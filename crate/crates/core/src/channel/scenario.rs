use nalgebra::Vector3;

use super::{rx_focusing_vector, tx_focusing_vector, FocusingVector, RxArray, Target};
use crate::em::{max_strength, LorentzianParams, OperatingPoint, PanelGeometry, PolarizabilityVector};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{lit, Real};

/// Everything needed to evaluate the bistatic measurement model. The design
/// frequency equals the element resonance, so only per-element damping is
/// stored; strengths are the design variable and are passed separately.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T: Real> {
    pub op: OperatingPoint<T>,
    pub panel: PanelGeometry<T>,
    /// Per-element damping `Gamma_n`, rad/s.
    pub damping: Vec<T>,
    pub targets: Vec<Target<T>>,
    pub rx: RxArray<T>,
    /// Noise variance per received sample, W.
    pub noise_variance: T,
    pub pilots: usize,
    /// Per-pilot power, W.
    pub pilot_power: T,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.panel.validate()?;
        self.rx.validate()?;
        let n = self.panel.len();
        if self.damping.len() != n {
            return Err(Error::invalid(format!("{} damping values for {n} elements", self.damping.len())));
        }
        if let Some(g) = self.damping.iter().find(|g| !(g.is_finite() && **g > T::zero())) {
            return Err(Error::invalid(format!("damping must be positive, got {g}")));
        }
        if self.targets.is_empty() {
            return Err(Error::invalid("scenario has no targets"));
        }
        let u = self.targets.len();
        if u > n.min(self.rx.len()) {
            return Err(Error::invalid(format!("{u} targets exceed min(N, M) = {}", n.min(self.rx.len()))));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance > T::zero()) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        if self.pilots == 0 {
            return Err(Error::invalid("at least one pilot is required"));
        }
        if !(self.pilot_power.is_finite() && self.pilot_power > T::zero()) {
            return Err(Error::invalid("pilot power must be positive"));
        }
        for t in &self.targets {
            if t.position.z == T::zero() {
                return Err(Error::invalid("target lies in the panel plane"));
            }
            for r in &self.panel.elements {
                if (t.position - Vector3::new(r.x, r.y, T::zero())).norm() == T::zero() {
                    return Err(Error::singular("target coincides with an element"));
                }
            }
            for a in &self.rx.antennas {
                if (t.position - a).norm() == T::zero() {
                    return Err(Error::singular("target coincides with a receive antenna"));
                }
            }
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.panel.len()
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    /// `2 T P_TX / sigma^2`.
    pub fn fisher_scale(&self) -> T {
        lit::<T>(2.0) * lit::<T>(self.pilots as f64) * self.pilot_power / self.noise_variance
    }

    /// Per-element upper bound on the resonance strength.
    pub fn strength_limits(&self) -> Vec<T> {
        self.damping.iter().map(|&g| max_strength(&self.op, self.panel.height, g)).collect()
    }

    pub fn lorentzian(&self, strengths: &[T]) -> Result<Vec<LorentzianParams<T>>> {
        if strengths.len() != self.damping.len() {
            return Err(Error::invalid("strength vector length mismatch"));
        }
        strengths
            .iter()
            .zip(&self.damping)
            .map(|(&f, &g)| LorentzianParams::new(f, self.op.omega, g))
            .collect()
    }

    /// Polarizabilities at resonance for the given strengths.
    pub fn polarizabilities(&self, strengths: &[T]) -> Result<PolarizabilityVector<T>> {
        PolarizabilityVector::resonant(strengths, self.op.omega, &self.damping)
    }

    pub fn tx_vectors(&self) -> Result<Vec<FocusingVector<T>>> {
        self.targets.iter().map(|t| tx_focusing_vector(&self.op, &self.panel, &t.position)).collect()
    }

    pub fn rx_vectors(&self) -> Result<Vec<FocusingVector<T>>> {
        self.targets.iter().map(|t| rx_focusing_vector(&self.op, &self.rx, &t.position)).collect()
    }

    pub fn reflections(&self) -> Vec<num_complex::Complex<T>> {
        self.targets.iter().map(|t| t.reflection).collect()
    }

    pub fn round_trip(&self) -> Result<CMatrix<T>> {
        Ok(super::round_trip_channel(&self.tx_vectors()?, &self.rx_vectors()?, &self.reflections()))
    }

    /// Same scenario with the receive combiner replaced.
    pub fn with_combiner(&self, combiner: CMatrix<T>) -> Result<Self> {
        let mut s = self.clone();
        s.rx = s.rx.with_combiner(combiner)?;
        Ok(s)
    }
}
