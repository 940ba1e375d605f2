//! Independent FIM constructions used to cross-check `location_fim`.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;

use super::fim::real_rows;
use super::{FimBlocks, FimFactor};
use crate::channel::{mean_response, Scenario};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::scalar::{cis, lit, Real};

/// Largest channel-parameter count the chain-rule oracle will materialize.
pub const ORACLE_MAX_PARAMS: usize = 5000;

/// `U (3N + 3M + 2)`.
pub fn channel_param_count(n: usize, m: usize, u: usize) -> usize {
    u * (3 * n + 3 * m + 2)
}

struct Layout {
    n: usize,
    m: usize,
    u: usize,
}

impl Layout {
    fn theta_a(&self, u: usize, n: usize) -> usize {
        u * self.n + n
    }
    fn theta_e(&self, u: usize, n: usize) -> usize {
        self.n * self.u + u * self.n + n
    }
    fn psi_a(&self, u: usize, m: usize) -> usize {
        2 * self.n * self.u + u * self.m + m
    }
    fn psi_e(&self, u: usize, m: usize) -> usize {
        2 * self.n * self.u + self.m * self.u + u * self.m + m
    }
    fn dist_tx(&self, u: usize, n: usize) -> usize {
        2 * (self.n + self.m) * self.u + u * self.n + n
    }
    fn dist_rx(&self, u: usize, m: usize) -> usize {
        (3 * self.n + 2 * self.m) * self.u + u * self.m + m
    }
    fn beta(&self, u: usize) -> usize {
        3 * (self.n + self.m) * self.u + 2 * u
    }
    /// Centre distances, appended after the standard vector because the
    /// focusing amplitudes depend on them.
    fn center_tx(&self, u: usize) -> usize {
        channel_param_count(self.n, self.m, self.u) + u
    }
    fn center_rx(&self, u: usize) -> usize {
        channel_param_count(self.n, self.m, self.u) + self.u + u
    }
    fn len(&self) -> usize {
        channel_param_count(self.n, self.m, self.u) + 2 * self.u
    }
}

fn angle_rows<T: Real>(d: &Vector3<T>) -> Result<([T; 3], [T; 3], T)> {
    let rho2 = d.x * d.x + d.y * d.y;
    if !(rho2 > T::zero()) {
        return Err(Error::domain("broadside geometry: azimuth is undefined"));
    }
    let rho = rho2.sqrt();
    let r = d.norm();
    let az = [-d.y / rho2, d.x / rho2, T::zero()];
    let el = [d.z * d.x / (r * r * rho), d.z * d.y / (r * r * rho), -rho / (r * r)];
    Ok((az, el, r))
}

/// Builds the FIM over the per-element angle/distance parameters, the
/// Jacobian from target positions to those parameters, and returns
/// `T^T J T`. Independent of the analytic focusing-vector derivatives.
pub fn chain_rule_fim_oracle<T: Real>(scenario: &Scenario<T>, m_bar: &CVector<T>) -> Result<FimBlocks<T>> {
    let layout = Layout { n: scenario.num_elements(), m: scenario.rx.len(), u: scenario.num_targets() };
    let l_std = channel_param_count(layout.n, layout.m, layout.u);
    if l_std > ORACLE_MAX_PARAMS {
        return Err(Error::Size(format!("chain-rule oracle needs L = {l_std} > {ORACLE_MAX_PARAMS}")));
    }
    let op = &scenario.op;
    let k = op.wavenumber;
    let amp = -(k * k * op.impedance) / T::two_pi();
    let w = &scenario.rx.combiner;
    let len = layout.len();
    let mut grad = DMatrix::<Complex<T>>::zeros(layout.m, len);
    let mut jac = DMatrix::<T>::zeros(len, 5 * layout.u);
    let jj = Complex::new(T::zero(), T::one());

    for (u, target) in scenario.targets.iter().enumerate() {
        let p = target.position;
        let beta = target.reflection;
        let rc_vec = p - Vector3::new(scenario.panel.center().x, scenario.panel.center().y, T::zero());
        let rc = rc_vec.norm();
        let bc_vec = p - scenario.rx.center;
        let bc = bc_vec.norm();

        // TX entries written directly in angle form
        let mut a_t = CVector::zeros(layout.n);
        let mut da_az = CVector::zeros(layout.n);
        let mut da_el = CVector::zeros(layout.n);
        for (n, r) in scenario.panel.elements.iter().enumerate() {
            let d = p - Vector3::new(r.x, r.y, T::zero());
            let (az_row, el_row, dist) = angle_rows(&d)?;
            let theta_a = d.y.atan2(d.x);
            let theta_e = (d.z / dist).acos();
            let ph = cis(k * dist) * (amp / rc);
            a_t[n] = ph * (theta_e.sin() * theta_a.sin());
            da_az[n] = ph * (theta_e.sin() * theta_a.cos());
            da_el[n] = ph * (theta_e.cos() * theta_a.sin());
            for a in 0..3 {
                jac[(layout.theta_a(u, n), 3 * u + a)] = az_row[a];
                jac[(layout.theta_e(u, n), 3 * u + a)] = el_row[a];
                jac[(layout.dist_tx(u, n), 3 * u + a)] = d[a] / dist;
            }
        }
        let mut a_r = CVector::zeros(layout.m);
        for (mi, ant) in scenario.rx.antennas.iter().enumerate() {
            let d = p - ant;
            let (az_row, el_row, dist) = angle_rows(&d)?;
            a_r[mi] = cis(k * dist) / Complex::new(bc, T::zero());
            for a in 0..3 {
                jac[(layout.psi_a(u, mi), 3 * u + a)] = az_row[a];
                jac[(layout.psi_e(u, mi), 3 * u + a)] = el_row[a];
                jac[(layout.dist_rx(u, mi), 3 * u + a)] = d[a] / dist;
            }
        }
        for a in 0..3 {
            jac[(layout.center_tx(u), 3 * u + a)] = rc_vec[a] / rc;
            jac[(layout.center_rx(u), 3 * u + a)] = bc_vec[a] / bc;
        }
        let bi = layout.beta(u);
        jac[(bi, 3 * layout.u + 2 * u)] = T::one();
        jac[(bi + 1, 3 * layout.u + 2 * u + 1)] = T::one();

        let wa_r = w.adjoint() * &a_r;
        let s = a_t.dotc(m_bar);
        // mu_u = beta W^H a_r (a_t^H m): a_t enters conjugated
        for n in 0..layout.n {
            let col = |z: Complex<T>| &wa_r * (beta * z.conj() * m_bar[n]);
            grad.set_column(layout.theta_a(u, n), &col(da_az[n]));
            grad.set_column(layout.theta_e(u, n), &col(da_el[n]));
            grad.set_column(layout.dist_tx(u, n), &col(jj * k * a_t[n]));
        }
        grad.set_column(layout.center_tx(u), &(&wa_r * (beta * s * Complex::new(-T::one() / rc, T::zero()))));
        for mi in 0..layout.m {
            let mut e = CVector::zeros(layout.m);
            e[mi] = jj * k * a_r[mi];
            grad.set_column(layout.dist_rx(u, mi), &(w.adjoint() * e * (beta * s)));
        }
        grad.set_column(layout.center_rx(u), &(&wa_r * (beta * s * Complex::new(-T::one() / bc, T::zero()))));
        grad.set_column(bi, &(&wa_r * s));
        grad.set_column(bi + 1, &(&wa_r * (jj * s)));
    }

    let c = scenario.fisher_scale();
    let full = (grad.adjoint() * &grad).map(|z| z.re * c);
    let reduced = jac.transpose() * full * &jac;
    FimBlocks::new(reduced, layout.u)
}

fn perturbed_mean<T: Real>(scenario: &Scenario<T>, m_bar: &CVector<T>, param: usize, delta: T) -> Result<CVector<T>> {
    let mut s = scenario.clone();
    let u = s.num_targets();
    if param < 3 * u {
        s.targets[param / 3].position[param % 3] += delta;
    } else {
        let b = param - 3 * u;
        let t = &mut s.targets[b / 2];
        if b.is_multiple_of(2) {
            t.reflection.re += delta;
        } else {
            t.reflection.im += delta;
        }
    }
    Ok(mean_response(&s.rx.combiner, &s.round_trip()?, m_bar))
}

/// FIM from central differences of the mean response. `position_step` in
/// metres, `beta_step` in reflection units.
pub fn finite_difference_fim<T: Real>(
    scenario: &Scenario<T>,
    m_bar: &CVector<T>,
    position_step: T,
    beta_step: T,
) -> Result<FimBlocks<T>> {
    let u = scenario.num_targets();
    let mut grads = Vec::with_capacity(5 * u);
    for i in 0..5 * u {
        let h = if i < 3 * u { position_step } else { beta_step };
        let plus = perturbed_mean(scenario, m_bar, i, h)?;
        let minus = perturbed_mean(scenario, m_bar, i, -h)?;
        grads.push((plus - minus) / Complex::new(lit::<T>(2.0) * h, T::zero()));
    }
    let c = scenario.fisher_scale();
    let j = DMatrix::from_fn(5 * u, 5 * u, |a, b| grads[a].dotc(&grads[b]).re * c);
    FimBlocks::new(j, u)?.with_factor(FimFactor { rows: real_rows(&grads, T::one()), scale: c })
}
