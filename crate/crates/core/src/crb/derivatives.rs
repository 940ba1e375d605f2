use num_complex::Complex;

use crate::channel::{rx_focusing_jacobian, tx_focusing_jacobian, Scenario};
use crate::error::Result;
use crate::linalg::CVector;
use crate::scalar::{cis, Real};

/// A matrix stored as `sum_k left_k right_k^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSum<T: Real> {
    pub terms: Vec<(CVector<T>, CVector<T>)>,
}

impl<T: Real> RankOneSum<T> {
    /// `(sum_k left_k right_k^H) v`.
    pub fn apply(&self, v: &CVector<T>) -> CVector<T> {
        let m = self.terms.first().map_or(0, |t| t.0.len());
        self.terms
            .iter()
            .fold(CVector::zeros(m), |acc, (l, r)| acc + l * r.dotc(v))
    }
}

/// Which parts of the coordinate derivatives to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeForm {
    /// Exact `dH_R / d xi~_i`.
    Full,
    /// Drops the components proportional to `a_RX a_TX^H` (common phase
    /// and centre-distance amplitude on both sides); they are fixed real
    /// combinations of the reflection derivatives, so the position Schur
    /// complement is unchanged.
    Reduced,
    /// `Reduced`, and additionally drops the transmit-side term. Valid only
    /// for a single moment vector, where that term is also parallel to
    /// `a_RX`.
    ReducedRankOne,
}

/// `dH_R / d xi~_i` for every location parameter, in canonical order.
pub fn derivative_terms<T: Real>(scenario: &Scenario<T>) -> Result<Vec<RankOneSum<T>>> {
    derivative_terms_with(scenario, DerivativeForm::Full)
}

pub fn derivative_terms_with<T: Real>(scenario: &Scenario<T>, form: DerivativeForm) -> Result<Vec<RankOneSum<T>>> {
    let u = scenario.num_targets();
    let tx = scenario.tx_vectors()?;
    let rx = scenario.rx_vectors()?;
    let k = scenario.op.wavenumber;
    let jj = Complex::new(T::zero(), T::one());
    let mut coords = Vec::with_capacity(3 * u);
    let mut betas = Vec::with_capacity(2 * u);
    for (idx, target) in scenario.targets.iter().enumerate() {
        let b = target.reflection;
        let p = target.position;
        let a_t = &tx[idx].values;
        let a_r = &rx[idx].values;
        let jt = match form {
            DerivativeForm::Full => tx_focusing_jacobian(&scenario.op, &scenario.panel, &p)?,
            _ => centred_tx_jacobian(scenario, &p),
        };
        let jr = match form {
            DerivativeForm::Full => rx_focusing_jacobian(&scenario.op, &scenario.rx, &p)?,
            _ => {
                let dc = p - scenario.rx.center;
                let bc = dc.norm();
                std::array::from_fn(|a| {
                    CVector::from_fn(a_r.len(), |m, _| {
                        let d = p - scenario.rx.antennas[m];
                        a_r[m] * jj * (k * (d[a] / d.norm() - dc[a] / bc))
                    })
                })
            }
        };
        for a in 0..3 {
            let mut terms = vec![(&jr[a] * b, a_t.clone())];
            if form != DerivativeForm::ReducedRankOne {
                terms.push((a_r * b, jt[a].clone()));
            }
            coords.push(RankOneSum { terms });
        }
        betas.push(RankOneSum { terms: vec![(a_r.clone(), a_t.clone())] });
        betas.push(RankOneSum { terms: vec![(a_r * jj, a_t.clone())] });
    }
    coords.extend(betas);
    Ok(coords)
}

/// TX focusing derivative without the `(jk - 1/R_c) dR_c/dp_a a_TX` part.
fn centred_tx_jacobian<T: Real>(scenario: &Scenario<T>, p: &nalgebra::Vector3<T>) -> [CVector<T>; 3] {
    let op = &scenario.op;
    let k = op.wavenumber;
    let amp = -(k * k * op.impedance) / T::two_pi();
    let centre = scenario.panel.center();
    let dc = p - nalgebra::Vector3::new(centre.x, centre.y, T::zero());
    let rc = dc.norm();
    let elements = &scenario.panel.elements;
    std::array::from_fn(|a| {
        CVector::from_fn(elements.len(), |n, _| {
            let r = elements[n];
            let d = p - nalgebra::Vector3::new(r.x, r.y, T::zero());
            let rn = d.norm();
            let s = d.y / rn;
            let ds = (if a == 1 { T::one() / rn } else { T::zero() }) - d.y * d[a] / (rn * rn * rn);
            let phase = k * (d[a] / rn - dc[a] / rc);
            cis(k * rn) * Complex::new(ds, s * phase) * (amp / rc)
        })
    })
}
