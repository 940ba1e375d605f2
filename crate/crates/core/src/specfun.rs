//! Cylinder functions of integer order 0, 1 and 2.
//!
//! Two regimes, split at [`ASYMPTOTIC_CROSSOVER`]:
//!
//! * `x < 25`: Miller backward recurrence for `J_0..J_2` normalised with
//!   `J_0 + 2 Σ J_2k = 1`, then `Y_0` and `Y_1` from their Neumann series in
//!   the same `J_n` (no cancellation beyond a few ulps on this interval).
//! * `x >= 25`: Hankel asymptotic expansion for orders 0 and 1, truncated at
//!   the smallest term (truncation error below `exp(-2x)`).
//!
//! Order 2 comes from the forward recurrence `C_2 = (2/x) C_1 - C_0` except
//! for `J_2` in the recurrence regime, which Miller yields directly.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Arguments at or above this use the asymptotic expansion.
pub const ASYMPTOTIC_CROSSOVER: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Integer order of a cylinder function. Only 0, 1 and 2 are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CylinderOrder {
    Zero,
    One,
    Two,
}

impl CylinderOrder {
    pub fn index(self) -> usize {
        match self {
            CylinderOrder::Zero => 0,
            CylinderOrder::One => 1,
            CylinderOrder::Two => 2,
        }
    }
}

impl TryFrom<u32> for CylinderOrder {
    type Error = Error;

    fn try_from(nu: u32) -> Result<Self> {
        match nu {
            0 => Ok(CylinderOrder::Zero),
            1 => Ok(CylinderOrder::One),
            2 => Ok(CylinderOrder::Two),
            _ => Err(Error::domain(format!("cylinder order {nu} not supported (0, 1, 2 only)"))),
        }
    }
}

/// `J_0..J_2` and `Y_0..Y_2` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderValues<T> {
    pub j: [T; 3],
    pub y: [T; 3],
}

impl<T: Real> CylinderValues<T> {
    /// `H_nu^(2) = J_nu - j Y_nu`.
    pub fn hankel2(&self, nu: CylinderOrder) -> Complex<T> {
        let i = nu.index();
        Complex::new(self.j[i], -self.y[i])
    }
}

/// Bessel function of the first kind.
pub fn bessel_j<T: Real>(nu: CylinderOrder, x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::domain("bessel_j argument is not finite"));
    }
    if x < T::zero() {
        return Err(Error::domain("bessel_j argument is negative"));
    }
    if x == T::zero() {
        return Ok(if nu == CylinderOrder::Zero { T::one() } else { T::zero() });
    }
    Ok(if x < lit(ASYMPTOTIC_CROSSOVER) {
        miller_j(x)[nu.index()]
    } else {
        asymptotic(x).j[nu.index()]
    })
}

/// Bessel function of the second kind; `x` must be strictly positive.
pub fn bessel_y<T: Real>(nu: CylinderOrder, x: T) -> Result<T> {
    Ok(cylinder(x)?.y[nu.index()])
}

/// Hankel function of the second kind, `J_nu(x) - j Y_nu(x)`.
pub fn hankel2<T: Real>(nu: CylinderOrder, x: T) -> Result<Complex<T>> {
    Ok(cylinder(x)?.hankel2(nu))
}

/// All six functions at once; the Green's-function kernels need several
/// orders at the same argument.
pub fn cylinder<T: Real>(x: T) -> Result<CylinderValues<T>> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::domain(format!(
            "cylinder functions of the second kind need a finite x > 0, got {x}"
        )));
    }
    Ok(if x < lit(ASYMPTOTIC_CROSSOVER) { recurrence_regime(x) } else { asymptotic(x) })
}

fn start_order<T: Real>(x: T) -> usize {
    let n = x.to_f64().unwrap_or(0.0) + 40.0;
    2 * ((n / 2.0).ceil() as usize)
}

/// Unnormalised backward recurrence; returns `J_0..J_n0` up to a common
/// factor together with that factor's reciprocal.
fn miller_table<T: Real>(x: T) -> (Vec<T>, T) {
    let n0 = start_order(x);
    let two = lit::<T>(2.0);
    let big = lit::<T>(1e10);
    let shrink = lit::<T>(1e-10);
    let mut v = vec![T::zero(); n0 + 2];
    v[n0] = lit(1e-20);
    for n in (1..=n0).rev() {
        v[n - 1] = two * lit::<T>(n as f64) / x * v[n] - v[n + 1];
        if v[n - 1].abs() > big {
            for e in &mut v[n - 1..] {
                *e *= shrink;
            }
        }
    }
    let mut norm = v[0];
    for k in (2..=n0).step_by(2) {
        norm += two * v[k];
    }
    (v, T::one() / norm)
}

fn miller_j<T: Real>(x: T) -> [T; 3] {
    let (v, scale) = miller_table(x);
    [v[0] * scale, v[1] * scale, v[2] * scale]
}

fn recurrence_regime<T: Real>(x: T) -> CylinderValues<T> {
    let (v, scale) = miller_table(x);
    let jn = |n: usize| v.get(n).copied().unwrap_or_else(T::zero) * scale;

    // s0 = Σ (-1)^k J_2k / k,  s1 = Σ (-1)^k (J_{2k-1} - J_{2k+1}) / k
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let n0 = v.len() - 2;
    for k in (1..=n0 / 2).rev() {
        let kf = lit::<T>(k as f64);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        s0 += sign * jn(2 * k) / kf;
        s1 += sign * (jn(2 * k - 1) - jn(2 * k + 1)) / kf;
    }

    let (j0, j1, j2) = (jn(0), jn(1), jn(2));
    let two_over_pi = lit::<T>(2.0) / T::pi();
    let log_term = (x / lit(2.0)).ln() + lit(EULER_GAMMA);
    let y0 = two_over_pi * (log_term * j0 - lit::<T>(2.0) * s0);
    let y1 = two_over_pi * (log_term * j1 - j0 / x + s1);
    let y2 = lit::<T>(2.0) / x * y1 - y0;
    CylinderValues { j: [j0, j1, j2], y: [y0, y1, y2] }
}

/// Hankel's expansion `P_nu`, `Q_nu` for orders 0 and 1.
fn pq<T: Real>(nu: u32, x: T) -> (T, T) {
    let mu = lit::<T>(4.0 * (nu * nu) as f64);
    let eight_x = lit::<T>(8.0) * x;
    let tiny = T::default_epsilon() * lit(1e-3);
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut prev = T::max_value().unwrap_or_else(|| lit(1e300));
    for k in 1..200u32 {
        let odd = lit::<T>(((2 * k - 1) * (2 * k - 1)) as f64);
        term *= (mu - odd) / (lit::<T>(k as f64) * eight_x);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        // k = 1, 2, 3, 4, ... contribute +Q, -P, -Q, +P, ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < tiny {
            break;
        }
    }
    (p, q)
}

fn asymptotic<T: Real>(x: T) -> CylinderValues<T> {
    let amp = (lit::<T>(2.0) / (T::pi() * x)).sqrt();
    let quarter_pi = T::frac_pi_4();
    let mut j = [T::zero(); 3];
    let mut y = [T::zero(); 3];
    for nu in 0..2u32 {
        let (p, q) = pq(nu, x);
        let chi = x - (lit::<T>(nu as f64) * T::frac_pi_2() + quarter_pi);
        let (s, c) = chi.sin_cos();
        j[nu as usize] = amp * (p * c - q * s);
        y[nu as usize] = amp * (p * s + q * c);
    }
    let two_over_x = lit::<T>(2.0) / x;
    j[2] = two_over_x * j[1] - j[0];
    y[2] = two_over_x * y[1] - y[0];
    CylinderValues { j, y }
}
