use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability, H/m (CODATA 2018).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

/// Single-frequency operating point. The waveguide is air filled, so the
/// guided wavenumber equals the free-space one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    pub frequency: T,
    pub omega: T,
    pub wavenumber: T,
    pub wavelength: T,
    /// Free-space impedance `mu0 * c`, ohm.
    pub impedance: T,
    pub mu0: T,
}

impl<T: Real> OperatingPoint<T> {
    pub fn new(frequency: T) -> Result<Self> {
        if !(frequency.is_finite() && frequency > T::zero()) {
            return Err(Error::invalid(format!("frequency must be positive, got {frequency}")));
        }
        let c = lit::<T>(SPEED_OF_LIGHT);
        let mu0 = lit::<T>(VACUUM_PERMEABILITY);
        let omega = T::two_pi() * frequency;
        Ok(Self {
            frequency,
            omega,
            wavenumber: omega / c,
            wavelength: c / frequency,
            impedance: mu0 * c,
            mu0,
        })
    }
}
