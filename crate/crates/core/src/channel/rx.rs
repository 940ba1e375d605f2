use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cabs, cis, lit, Real};

/// Tolerance on `W^H W = I`.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// Fully digital receive array of half-wavelength spaced antennas centred on
/// `center`, followed by a unitary combiner.
#[derive(Debug, Clone, PartialEq)]
pub struct RxArray<T: Real> {
    pub center: Vector3<T>,
    pub antennas: Vec<Vector3<T>>,
    pub combiner: CMatrix<T>,
}

impl<T: Real> RxArray<T> {
    /// `count` antennas along `axis` (normalised internally) with spacing
    /// `wavelength / 2`, identity combiner.
    pub fn uniform_line(center: Vector3<T>, count: usize, wavelength: T, axis: Vector3<T>) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("receive array needs at least one antenna"));
        }
        let len = axis.norm();
        if !(len > T::zero()) {
            return Err(Error::invalid("receive array axis is zero"));
        }
        let dir = axis / len;
        let spacing = wavelength / lit(2.0);
        let mid = lit::<T>((count as f64 - 1.0) / 2.0);
        let antennas = (0..count)
            .map(|m| center + dir * ((lit::<T>(m as f64) - mid) * spacing))
            .collect();
        Ok(Self { center, antennas, combiner: DMatrix::identity(count, count) })
    }

    /// `rows x cols` grid spanned by `axis_u` (row direction) and `axis_v`,
    /// spacing `wavelength / 2`, antennas numbered row-major.
    pub fn uniform_planar(
        center: Vector3<T>,
        rows: usize,
        cols: usize,
        wavelength: T,
        axis_u: Vector3<T>,
        axis_v: Vector3<T>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("receive array needs at least one antenna"));
        }
        let (lu, lv) = (axis_u.norm(), axis_v.norm());
        if !(lu > T::zero() && lv > T::zero()) {
            return Err(Error::invalid("receive array axis is zero"));
        }
        let (du, dv) = (axis_u / lu, axis_v / lv);
        if du.dot(&dv).abs() > lit(1e-12) {
            return Err(Error::invalid("planar receive array axes must be orthogonal"));
        }
        let spacing = wavelength / lit(2.0);
        let mid_r = lit::<T>((rows as f64 - 1.0) / 2.0);
        let mid_c = lit::<T>((cols as f64 - 1.0) / 2.0);
        let mut antennas = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let off_r = (lit::<T>(r as f64) - mid_r) * spacing;
                let off_c = (lit::<T>(c as f64) - mid_c) * spacing;
                antennas.push(center + du * off_r + dv * off_c);
            }
        }
        let m = antennas.len();
        Ok(Self { center, antennas, combiner: DMatrix::identity(m, m) })
    }

    pub fn len(&self) -> usize {
        self.antennas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.antennas.is_empty()
    }

    pub fn with_combiner(mut self, combiner: CMatrix<T>) -> Result<Self> {
        check_unitary(&combiner, self.len())?;
        self.combiner = combiner;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_unitary(&self.combiner, self.len())
    }
}

pub fn check_unitary<T: Real>(w: &CMatrix<T>, m: usize) -> Result<()> {
    if w.shape() != (m, m) {
        return Err(Error::invalid(format!("combiner must be {m}x{m}, got {}x{}", w.nrows(), w.ncols())));
    }
    let gram = w.adjoint() * w;
    let tol = lit::<T>(UNITARY_TOLERANCE);
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { T::one() } else { T::zero() };
            if cabs(gram[(i, j)] - Complex::new(target, T::zero())) > tol {
                return Err(Error::invalid("combiner is not unitary (noise would not stay white)"));
            }
        }
    }
    Ok(())
}

/// Normalised `M`-point DFT matrix, `W[a, b] = exp(-j 2 pi a b / M) / sqrt(M)`.
pub fn dft_codebook<T: Real>(m: usize) -> CMatrix<T> {
    let scale = T::one() / lit::<T>(m as f64).sqrt();
    DMatrix::from_fn(m, m, |a, b| {
        let phase = -T::two_pi() * lit::<T>(((a * b) % m) as f64) / lit(m as f64);
        cis(phase) * scale
    })
}

/// DFT codebook with its beams (columns) in a seeded random order.
pub fn random_dft_combiner<T: Real>(m: usize, seed: u64) -> CMatrix<T> {
    let base = dft_codebook::<T>(m);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    DMatrix::from_fn(m, m, |a, b| base[(a, order[b])])
}
