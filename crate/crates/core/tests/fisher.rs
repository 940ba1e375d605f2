mod common;

use common::{random_moments, rel_err, scenario};
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;
use proptest::prelude::*;
use wgms_core::channel::{random_dft_combiner, RxArray};
use wgms_core::crb::{
    chain_rule_fim_oracle, channel_param_count, effective_fim, fim_linear_in_m, finite_difference_fim, location_fim,
    peb, FimBlocks,
};
use wgms_core::linalg::sym_eigenvalues;
use wgms_core::Error;

const MOMENT_SCALE: f64 = 1e-6;

/// Largest entry-wise deviation measured against `sqrt(J_ii J_jj)`.
fn normalized_gap(a: &FimBlocks<f64>, b: &FimBlocks<f64>) -> f64 {
    let n = a.matrix.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = (a.matrix[(i, i)] * a.matrix[(j, j)]).sqrt();
            worst = worst.max((a.matrix[(i, j)] - b.matrix[(i, j)]).abs() / s);
        }
    }
    worst
}

#[test]
fn parameter_count() {
    assert_eq!(channel_param_count(4, 4, 1), 26);
    assert_eq!(channel_param_count(64, 16, 2), 2 * (192 + 48 + 2));
}

#[test]
fn direct_fim_matches_chain_rule_oracle() {
    for n in [2, 4] {
        for m in [2, 4] {
            for u in [1, 2] {
                let s = scenario(n, m, u, 100 + (n * 10 + m * 3 + u) as u64);
                let mb = random_moments(n, MOMENT_SCALE, 5);
                let direct = location_fim(&s, &mb).unwrap();
                let oracle = chain_rule_fim_oracle(&s, &mb).unwrap();
                let gap = normalized_gap(&direct, &oracle);
                assert!(gap < 1e-8, "N={n} M={m} U={u}: gap {gap:e}");
            }
        }
    }
}

#[test]
fn direct_fim_matches_finite_differences() {
    for u in [1, 2] {
        let s = scenario(4, 4, u, 7 + u as u64);
        let mb = random_moments(4, MOMENT_SCALE, 8);
        let direct = location_fim(&s, &mb).unwrap();
        let fd = finite_difference_fim(&s, &mb, 1e-4 * s.op.wavelength, 1e-4).unwrap();
        let gap = normalized_gap(&direct, &fd);
        assert!(gap < 1e-4, "U={u}: gap {gap:e}");
    }
    // two targets need 10 real dimensions: 4 complex samples are not enough
    let s = scenario(4, 4, 2, 9);
    let mb = random_moments(4, MOMENT_SCALE, 8);
    assert!(matches!(peb(&location_fim(&s, &mb).unwrap()), Err(Error::Unobservable { .. })));
}

#[test]
fn peb_matches_finite_difference_fim() {
    for u in [1, 2] {
        let s = scenario(4, 16, u, 17 + u as u64);
        let mb = random_moments(4, MOMENT_SCALE, 8);
        let direct = peb(&location_fim(&s, &mb).unwrap()).unwrap().peb;
        let fd = peb(&finite_difference_fim(&s, &mb, 1e-4 * s.op.wavelength, 1e-4).unwrap()).unwrap().peb;
        assert!(rel_err(fd, direct) < 1e-3, "U={u}: {fd} vs {direct}");
    }
}

#[test]
fn line_receiver_cannot_localize_in_three_dimensions() {
    let mut s = scenario(8, 8, 1, 3);
    s.rx = RxArray::uniform_line(s.rx.center, 8, s.op.wavelength, Vector3::y()).unwrap();
    let mb = random_moments(8, MOMENT_SCALE, 2);
    assert!(matches!(peb(&location_fim(&s, &mb).unwrap()), Err(Error::Unobservable { .. })));
}

#[test]
fn oracle_size_guard() {
    let s = scenario(1000, 4, 2, 1);
    let mb = random_moments(1000, MOMENT_SCALE, 1);
    assert!(matches!(chain_rule_fim_oracle(&s, &mb), Err(Error::Size(_))));
}

#[test]
fn pilot_and_noise_scaling() {
    let s = scenario(16, 8, 2, 21);
    let mb = random_moments(16, MOMENT_SCALE, 3);
    let base = location_fim(&s, &mb).unwrap();
    let p0 = peb(&base).unwrap().peb;

    let mut s4 = s.clone();
    s4.pilots *= 4;
    let j4 = location_fim(&s4, &mb).unwrap();
    assert!((&j4.matrix - &base.matrix * 4.0).norm() <= 1e-12 * j4.matrix.norm());

    let mut s2 = s.clone();
    s2.pilots *= 2;
    let p2 = peb(&location_fim(&s2, &mb).unwrap()).unwrap().peb;
    assert!((p2 / p0 - 0.5f64.sqrt()).abs() < 1e-10);

    let mut sn = s.clone();
    sn.noise_variance *= 4.0;
    let jn = location_fim(&sn, &mb).unwrap();
    assert!((&jn.matrix - &base.matrix * 0.25).norm() <= 1e-12 * base.matrix.norm());
    let pn = peb(&jn).unwrap().peb;
    assert!((pn / p0 - 2.0).abs() < 1e-10);
}

#[test]
fn linear_form_consistency() {
    let s = scenario(12, 4, 2, 31);
    let m1 = random_moments(12, MOMENT_SCALE, 1);
    let m2 = random_moments(12, MOMENT_SCALE, 2);
    let c1 = &m1 * m1.adjoint();
    let c2 = &m2 * m2.adjoint();
    let direct = location_fim(&s, &m1).unwrap();
    let lin = fim_linear_in_m(&s, &c1).unwrap();
    assert!(normalized_gap(&direct, &lin) < 1e-10);

    let sum = fim_linear_in_m(&s, &(&c1 + &c2)).unwrap();
    let parts = &lin.matrix + fim_linear_in_m(&s, &c2).unwrap().matrix;
    assert!((&sum.matrix - &parts).norm() <= 1e-12 * parts.norm());

    let zero = fim_linear_in_m(&s, &DMatrix::zeros(12, 12)).unwrap();
    assert!(zero.matrix.iter().all(|v| *v == 0.0));

    let mut skew = c1.clone();
    skew[(0, 1)] += Complex::new(1.0, 0.0);
    assert!(matches!(fim_linear_in_m(&s, &skew), Err(Error::Domain(_))));
}

#[test]
fn peb_invariant_under_receive_recombination() {
    let s = scenario(10, 8, 2, 41);
    let mb = random_moments(10, MOMENT_SCALE, 4);
    let p0 = peb(&location_fim(&s, &mb).unwrap()).unwrap().peb;
    for seed in 0..3 {
        let q = random_dft_combiner(8, seed);
        let s2 = s.with_combiner(&s.rx.combiner * q).unwrap();
        let p = peb(&location_fim(&s2, &mb).unwrap()).unwrap().peb;
        assert!(rel_err(p, p0) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fim_is_psd_and_schur_loses_information(seed in 0u64..10_000, n in 2usize..12, u in 1usize..3) {
        let s = scenario(n, 4, u, seed);
        let mb = random_moments(n, MOMENT_SCALE, seed + 1);
        let j = location_fim(&s, &mb).unwrap();
        let ev = sym_eigenvalues(&j.matrix);
        prop_assert!(ev[0] >= -1e-9 * ev[ev.len() - 1]);
        if let Ok(e) = effective_fim(&j) {
            let diff = j.pp() - e;
            let dv = sym_eigenvalues(&diff);
            let scale = sym_eigenvalues(&j.pp()).last().copied().unwrap();
            prop_assert!(dv[0] >= -1e-9 * scale);
        }
    }
}

#[test]
fn reduced_derivatives_preserve_the_schur_complement() {
    use wgms_core::crb::{derivative_terms_with, DerivativeForm};
    let s = scenario(12, 16, 2, 61);
    let c = s.fisher_scale();
    let vs: Vec<_> = (0..3).map(|k| random_moments(12, MOMENT_SCALE, 70 + k)).collect();
    let fim = |form| {
        let terms = derivative_terms_with(&s, form).unwrap();
        let mut j = DMatrix::<f64>::zeros(10, 10);
        for v in &vs {
            let g: Vec<_> = terms.iter().map(|d| s.rx.combiner.adjoint() * d.apply(v)).collect();
            for a in 0..10 {
                for b in 0..10 {
                    j[(a, b)] += g[a].dotc(&g[b]).re * c;
                }
            }
        }
        FimBlocks::new(j, 2).unwrap()
    };
    let full = effective_fim(&fim(DerivativeForm::Full)).unwrap();
    let reduced = effective_fim(&fim(DerivativeForm::Reduced)).unwrap();
    assert!((&full - &reduced).norm() < 1e-6 * reduced.norm(), "{:e}", (&full - &reduced).norm() / reduced.norm());
}
