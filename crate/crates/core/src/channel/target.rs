use nalgebra::Vector3;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T: Real> {
    pub position: Vector3<T>,
    /// Complex reflection coefficient `beta_u`.
    pub reflection: Complex<T>,
}

impl<T: Real> Target<T> {
    pub fn new(position: Vector3<T>, reflection: Complex<T>) -> Result<Self> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("target position is not finite"));
        }
        if position.z == T::zero() {
            return Err(Error::invalid("target lies in the panel plane (z = 0)"));
        }
        Ok(Self { position, reflection })
    }
}
