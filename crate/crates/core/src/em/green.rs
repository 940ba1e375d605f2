//! Pair kernels for `x`-directed magnetic dipoles: the guided parallel-plate
//! mode and the image-corrected free-space term.
//!
//! Azimuth enters only through `cos(2 psi) = (dx^2 - dy^2) / rho^2` and
//! `cos^2 psi = dx^2 / rho^2`, so both kernels are even in the displacement
//! and need no arctangent.

use nalgebra::Vector2;
use num_complex::Complex;

use super::OperatingPoint;
use crate::error::{Error, Result};
use crate::scalar::{cis, lit, Real};
use crate::specfun::{cylinder, CylinderOrder};

fn pair_geometry<T: Real>(delta: &Vector2<T>) -> Result<(T, T, T)> {
    let rho2 = delta.x * delta.x + delta.y * delta.y;
    if !(rho2 > T::zero()) {
        return Err(Error::singular("Green's function evaluated at zero separation"));
    }
    let rho = rho2.sqrt();
    let cos_sq = delta.x * delta.x / rho2;
    let cos_2psi = (delta.x * delta.x - delta.y * delta.y) / rho2;
    Ok((rho, cos_sq, cos_2psi))
}

/// Waveguide coupling `-(j k^2 / 8h) [H0(k rho) - cos(2 psi) H2(k rho)]`.
pub fn green_wg<T: Real>(op: &OperatingPoint<T>, height: T, delta: &Vector2<T>) -> Result<Complex<T>> {
    let (rho, _, cos_2psi) = pair_geometry(delta)?;
    Ok(wg_kernel(op.wavenumber, height, rho, cos_2psi))
}

/// Free-space coupling (`x`-to-`x` dyadic component with the ground-plane image).
pub fn green_fs<T: Real>(op: &OperatingPoint<T>, delta: &Vector2<T>) -> Result<Complex<T>> {
    let (rho, cos_sq, _) = pair_geometry(delta)?;
    Ok(fs_kernel(op.wavenumber, rho, cos_sq))
}

/// `green_wg + green_fs`, sharing the pair geometry.
pub fn green_total<T: Real>(op: &OperatingPoint<T>, height: T, delta: &Vector2<T>) -> Result<Complex<T>> {
    let (rho, cos_sq, cos_2psi) = pair_geometry(delta)?;
    Ok(wg_kernel(op.wavenumber, height, rho, cos_2psi) + fs_kernel(op.wavenumber, rho, cos_sq))
}

fn wg_kernel<T: Real>(k: T, height: T, rho: T, cos_2psi: T) -> Complex<T> {
    let c = cylinder(k * rho).expect("k rho > 0");
    let bracket = c.hankel2(CylinderOrder::Zero) - c.hankel2(CylinderOrder::Two) * cos_2psi;
    // -(j a) * (re + j im) = a*im - j a*re
    let a = k * k / (lit::<T>(8.0) * height);
    Complex::new(a * bracket.im, -a * bracket.re)
}

fn fs_kernel<T: Real>(k: T, rho: T, cos_sq: T) -> Complex<T> {
    let u = k * rho;
    let inv_u = T::one() / u;
    let inv_u2 = inv_u * inv_u;
    let three = lit::<T>(3.0);
    let angular = Complex::new(three * inv_u2 - T::one(), three * inv_u) * cos_sq;
    let isotropic = Complex::new(T::one() - inv_u2, -inv_u);
    let radial = cis(-u) * (k * k / (T::two_pi() * rho));
    (angular + isotropic) * radial
}
